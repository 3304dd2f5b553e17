"""refaudit: forensic verification of bibliography references.

Classifies every citation in a corpus as Valid, Sloppy, Phantom, or Unknown
by resolving identifiers and fuzzy-matching titles against scholarly
metadata services, diagnoses phantom failure modes, and derives corpus
statistics and citation-integrity decay projections.
"""

from .model import (
    AuditConfig,
    CitationRecord,
    CorpusSummary,
    DecayParams,
    DecayResult,
    PaperAudit,
    PhantomType,
    TrendFit,
    VerificationMethod,
    VerificationOutcome,
    VerificationStatus,
)
from .pipeline import audit_corpus, categorize_phantom, classify, verify_citation

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "CitationRecord",
    "CorpusSummary",
    "DecayParams",
    "DecayResult",
    "PaperAudit",
    "PhantomType",
    "TrendFit",
    "VerificationMethod",
    "VerificationOutcome",
    "VerificationStatus",
    "audit_corpus",
    "categorize_phantom",
    "classify",
    "verify_citation",
    "__version__",
]
