import pytest
from hypothesis import given, strategies as st

from polariscope.corpus import (
    Chamber,
    DEFAULT_PHASES,
    DEMOCRATIC,
    InvalidTermError,
    NoPhaseError,
    Party,
    PartyKind,
    Politician,
    assign_phase,
    congress_years,
    derive_phases,
    validate_politician,
)
from polariscope.store import politician_from_record, politician_to_record


def make_politician(**overrides) -> Politician:
    base = dict(
        id="jane-doe",
        display_name="Jane Doe",
        party=DEMOCRATIC,
        chamber=Chamber.SENATE,
        terms=frozenset({116, 117}),
        phases=frozenset({4}),
        sections={"__lead__": "Jane Doe is a senator.", "Early life": "Born."},
    )
    base.update(overrides)
    return Politician(**base)


class TestCongressYears:
    def test_base_case(self):
        assert congress_years(1) == (1789, 1791)

    def test_first_in_scope(self):
        # consistent with the "past 120 years" framing
        assert congress_years(58) == (1903, 1905)

    def test_last_in_scope(self):
        # endpoint of the 1995-2021 span
        assert congress_years(117) == (2021, 2023)

    def test_invalid_ordinal(self):
        with pytest.raises(InvalidTermError):
            congress_years(0)

    @given(st.integers(min_value=1, max_value=200))
    def test_successor_starts_two_years_later(self, n):
        assert congress_years(n + 1)[0] == congress_years(n)[0] + 2


class TestAssignPhase:
    def test_phase_four_starts_at_104(self):
        assert assign_phase(104).index == 4

    def test_lowest_ordinal(self):
        assert assign_phase(58).index == 1

    def test_default_table_lookup(self):
        assert assign_phase(90).index == 3

    def test_out_of_range(self):
        with pytest.raises(NoPhaseError):
            assign_phase(57)
        with pytest.raises(NoPhaseError):
            assign_phase(118)

    def test_phases_partition_in_scope_range(self):
        seen = {}
        for n in range(58, 118):
            phase = assign_phase(n)
            seen.setdefault(phase.index, []).append(n)
        assert sorted(seen) == [1, 2, 3, 4]
        assert sum(len(v) for v in seen.values()) == 60
        flat = sorted(n for v in seen.values() for n in v)
        assert flat == list(range(58, 118))


class TestParty:
    def test_other_requires_label(self):
        with pytest.raises(ValueError):
            Party(PartyKind.OTHER)

    def test_major_forbids_label(self):
        with pytest.raises(ValueError):
            Party(PartyKind.DEMOCRATIC, other_label="x")

    def test_other_label_roundtrip(self):
        p = Party(PartyKind.OTHER, other_label="Independent")
        assert not p.is_major


class TestValidatePolitician:
    def test_well_formed(self):
        assert validate_politician(make_politician()) == []

    def test_duplicate_normalized_heading(self):
        p = make_politician(sections={"Career": "a", "career ": "b"})
        violations = validate_politician(p)
        assert any("duplicate normalized heading" in v for v in violations)

    def test_phase_derivation_mismatch(self):
        p = make_politician(phases=frozenset({1}))
        violations = validate_politician(p)
        assert any(v.startswith("phases:") for v in violations)

    def test_empty_sections(self):
        p = make_politician(sections={})
        assert any(v.startswith("sections:") for v in violations_of(p))

    def test_serialization_roundtrip_stays_valid(self):
        p = make_politician()
        assert validate_politician(p) == []
        again = politician_from_record(politician_to_record(p))
        assert validate_politician(again) == []
        assert again == p


def violations_of(p):
    return validate_politician(p)


def test_derive_phases_spans_eras():
    assert derive_phases(frozenset({58, 104})) == frozenset({1, 4})
    assert derive_phases(frozenset({95, 116})) == frozenset({3, 4})


def test_default_phase_table_shape():
    ranges = [p.congress_range for p in DEFAULT_PHASES]
    assert ranges == [(58, 73), (74, 88), (89, 103), (104, 117)]
