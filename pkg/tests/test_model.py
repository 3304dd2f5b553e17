import pytest

from refaudit.model import (
    AuditConfig,
    CitationRecord,
    PaperAudit,
    PhantomType,
    VerificationMethod,
    VerificationOutcome,
    VerificationStatus,
)


def make_record(**overrides):
    fields = {
        "citation_id": "c1",
        "paper_id": "p1",
        "raw_text": "Some Author. A Perfectly Normal Citation Title. Venue 2024.",
    }
    fields.update(overrides)
    return CitationRecord(**fields)


class TestCitationRecord:
    def test_accepts_well_formed_record(self):
        record = make_record(doi="10.17605/OSF.IO/T8S53")
        assert record.doi == "10.17605/OSF.IO/T8S53"

    def test_rejects_blank_raw_text(self):
        with pytest.raises(ValueError, match="raw_text"):
            make_record(raw_text="   ")

    def test_rejects_malformed_doi(self):
        with pytest.raises(ValueError, match="doi"):
            make_record(doi="not-a-doi")

    def test_accepts_truncated_but_syntactic_doi(self):
        # Short suffixes are syntactically fine; truncation is a diagnostic.
        assert make_record(doi="10.48550/ar").doi == "10.48550/ar"


class TestVerificationOutcome:
    def test_identifier_valid_requires_similarity_100(self):
        with pytest.raises(ValueError, match="similarity 100"):
            VerificationOutcome(
                citation_id="c1",
                status=VerificationStatus.VALID,
                best_similarity=90.0,
                method=VerificationMethod.DOI_RESOLUTION,
            )

    def test_phantom_type_only_on_phantoms(self):
        with pytest.raises(ValueError, match="phantom_type"):
            VerificationOutcome(
                citation_id="c1",
                status=VerificationStatus.VALID,
                best_similarity=100.0,
                method=VerificationMethod.DOI_RESOLUTION,
                phantom_type=PhantomType.GHOST,
            )

    def test_broken_link_requires_not_found_status(self):
        with pytest.raises(ValueError, match="not-found"):
            VerificationOutcome(
                citation_id="c1",
                status=VerificationStatus.PHANTOM,
                best_similarity=0.0,
                method=VerificationMethod.TITLE_SEARCH,
                phantom_type=PhantomType.BROKEN_LINK,
            )

    def test_entropy_reject_must_be_unknown(self):
        with pytest.raises(ValueError, match="Unknown"):
            VerificationOutcome(
                citation_id="c1",
                status=VerificationStatus.PHANTOM,
                best_similarity=0.0,
                method=VerificationMethod.ENTROPY_REJECT,
            )

    def test_similarity_range_enforced(self):
        with pytest.raises(ValueError, match="outside"):
            VerificationOutcome(
                citation_id="c1",
                status=VerificationStatus.VALID,
                best_similarity=101.0,
                method=VerificationMethod.TITLE_SEARCH,
            )


class TestAuditConfig:
    def test_defaults_are_the_baseline_thresholds(self):
        config = AuditConfig()
        assert config.tau_valid == 85.0
        assert config.tau_sloppy == 50.0
        assert config.tau_rho == 0.10
        assert config.ghost_cut == 25.0
        assert config.z_score == 1.96
        assert config.backoff_initial_seconds == 1.0
        assert config.backoff_max_seconds == 60.0
        assert config.per_source_min_interval_seconds == {
            "semantic-scholar": 1.0,
            "crossref": 0.1,
        }

    @pytest.mark.parametrize(
        "overrides",
        [
            {"tau_sloppy": 90.0},  # above tau_valid
            {"tau_sloppy": 0.0},
            {"tau_valid": 101.0},
            {"ghost_cut": 60.0},  # above tau_sloppy
            {"ghost_cut": -1.0},
            {"tau_rho": 0.0},
            {"tau_rho": 1.0},
            {"backoff_initial_seconds": 90.0},  # above max
            {"max_retries": -1},
        ],
    )
    def test_rejects_inconsistent_thresholds(self, overrides):
        with pytest.raises(ValueError):
            AuditConfig(**overrides)


class TestPaperAudit:
    def test_counts_must_sum_to_total(self):
        with pytest.raises(ValueError, match="sum"):
            PaperAudit(
                paper_id="p1",
                submission_month=0.0,
                n_citations=3,
                counts={VerificationStatus.VALID: 2},
                phantom_rate=0.0,
            )

    def test_phantom_rate_must_be_exact(self):
        counts = {
            VerificationStatus.VALID: 3,
            VerificationStatus.SLOPPY: 0,
            VerificationStatus.PHANTOM: 1,
            VerificationStatus.UNKNOWN: 0,
        }
        with pytest.raises(ValueError, match="phantom_rate"):
            PaperAudit(
                paper_id="p1",
                submission_month=0.0,
                n_citations=4,
                counts=counts,
                phantom_rate=0.3,
            )
        audit = PaperAudit(
            paper_id="p1",
            submission_month=0.0,
            n_citations=4,
            counts=counts,
            phantom_rate=0.25,
        )
        assert audit.phantom_rate == 0.25
