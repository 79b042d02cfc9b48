import json

import pytest

from polariscope.clean import (
    LOC,
    ORG,
    PERSON,
    CleanPolicy,
    EntitySpan,
    ExternalFileTagger,
    RuleBasedTagger,
    SpanAlignmentError,
    apply_masking,
    clean_bundle,
    find_digits,
    find_gazetteer_phrases,
    find_stoplist_tokens,
    resolve_overlaps,
    strip_numbers_and_noise,
    strip_party_terms,
    tag_entities,
)
from polariscope.corpus import CategoryBundle

TAGGER = RuleBasedTagger()
POLICY = CleanPolicy()


class TestTagEntities:
    def test_golden_senator_sentence(self):
        text = "Senator John Smith of Ohio"
        spans = tag_entities(text, TAGGER)
        assert spans == [EntitySpan(8, 18, PERSON), EntitySpan(22, 26, LOC)]

    def test_empty_text(self):
        assert tag_entities("", TAGGER) == []

    def test_multiword_location(self):
        text = "She moved to New York after college."
        spans = tag_entities(text, TAGGER)
        assert EntitySpan(13, 21, LOC) in spans

    def test_org_suffix_with_connector(self):
        text = "He taught at the University of Dayton for years."
        spans = tag_entities(text, TAGGER)
        assert any(s.label == ORG and text[s.start:s.end] == "University of Dayton" for s in spans)

    def test_runs_do_not_cross_sentences(self):
        text = "She lives in Ohio. Sarah Hartwell agrees."
        spans = tag_entities(text, TAGGER)
        labels = {text[s.start:s.end]: s.label for s in spans}
        assert labels.get("Ohio") == LOC
        assert labels.get("Sarah Hartwell") == PERSON

    def test_possessive_location(self):
        text = "He praised Ohio's farms."
        spans = tag_entities(text, TAGGER)
        assert any(s.label == LOC for s in spans)

    def test_overlap_longest_wins(self):
        spans = resolve_overlaps(
            [EntitySpan(0, 4, LOC), EntitySpan(0, 10, ORG), EntitySpan(12, 15, PERSON)]
        )
        assert spans == [EntitySpan(0, 10, ORG), EntitySpan(12, 15, PERSON)]

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            EntitySpan(5, 5, LOC)


class TestExternalTagger:
    def write(self, tmp_path, spans):
        path = tmp_path / "spans.jsonl"
        path.write_text(
            json.dumps({"id": "jane", "category": "political", "spans": spans}) + "\n",
            "utf-8",
        )
        return ExternalFileTagger(path)

    def test_loads_spans_for_key(self, tmp_path):
        tagger = self.write(tmp_path, [[0, 4, PERSON]])
        assert tag_entities("John went", tagger, key=("jane", "political")) == [
            EntitySpan(0, 4, PERSON)
        ]

    def test_out_of_bounds_span(self, tmp_path):
        tagger = self.write(tmp_path, [[0, 99, PERSON]])
        with pytest.raises(SpanAlignmentError):
            tag_entities("short", tagger, key=("jane", "political"))

    def test_unknown_key_is_empty(self, tmp_path):
        tagger = self.write(tmp_path, [[0, 4, PERSON]])
        assert tag_entities("John went", tagger, key=("other", "political")) == []


class TestApplyMasking:
    def test_leading_person_deleted(self):
        out = apply_masking("John went to Congress", [EntitySpan(0, 4, PERSON)], frozenset({PERSON}))
        assert out == "went to Congress"

    def test_label_not_in_removal_set(self):
        out = apply_masking("born in Ohio", [EntitySpan(8, 12, LOC)], frozenset({PERSON, ORG}))
        assert out == "born in Ohio"

    def test_trailing_location_deleted(self):
        out = apply_masking("born in Ohio", [EntitySpan(8, 12, LOC)], frozenset({LOC}))
        assert out == "born in"

    def test_never_longer_and_order_preserved(self):
        text = "Alpha John Smith beta Ohio gamma"
        spans = tag_entities(text, TAGGER)
        out = apply_masking(text, spans, frozenset({PERSON, LOC}))
        assert len(out) <= len(text)
        assert out.index("Alpha") < out.index("beta") < out.index("gamma")

    def test_no_spans_is_identity(self):
        text = "line one\n line two"
        assert apply_masking(text, [], frozenset({PERSON})) == text


class TestStripNumbersAndNoise:
    def test_golden_citation_and_digits(self):
        assert strip_numbers_and_noise("won 54% in 2010[3]", POLICY) == "won % in"

    def test_no_digits_untouched(self):
        assert strip_numbers_and_noise("no digits here", POLICY) == "no digits here"

    def test_url_removed(self):
        assert strip_numbers_and_noise("see https://x.y now", POLICY) == "see now"

    def test_template_removed(self):
        assert strip_numbers_and_noise("a {{cite web}} b", POLICY) == "a b"


class TestStripPartyTerms:
    def test_whole_token_removed(self):
        assert strip_party_terms("a Democratic senator") == "a senator"

    def test_gop_stoplisted(self):
        assert strip_party_terms("the GOP caucus") == "the caucus"

    def test_substring_inside_word_survives(self):
        assert strip_party_terms("undemocratic behavior") == "undemocratic behavior"


class TestCleanBundle:
    def test_asymmetric_location_rule(self):
        bundle = CategoryBundle(
            background="She was born in Ohio.",
            political="She represented Ohio in Congress.",
            other="",
        )
        clean = clean_bundle(bundle, TAGGER, POLICY)
        assert "Ohio" in clean.background
        assert "Ohio" not in clean.political
        assert clean.policy_id == POLICY.policy_id

    def test_empty_bundle(self):
        clean = clean_bundle(CategoryBundle("", "", ""), TAGGER, POLICY)
        assert (clean.background, clean.political, clean.other) == ("", "", "")

    def test_digits_only_other(self):
        clean = clean_bundle(CategoryBundle("", "", "123 456"), TAGGER, POLICY)
        assert clean.other == ""

    def test_placeholder_mode(self):
        policy = CleanPolicy(mask_mode="placeholder")
        bundle = CategoryBundle("John Smith spoke.", "", "")
        clean = clean_bundle(bundle, TAGGER, policy)
        assert "<ent>" in clean.background
        assert policy.policy_id != POLICY.policy_id

    def test_policy_id_tracks_fields(self):
        assert CleanPolicy(strip_numbers=False).policy_id != POLICY.policy_id

    def test_cleaning_idempotent(self):
        bundle = CategoryBundle(
            background="Sarah Hartwell was born in Dayton, Ohio in 1962.[1]",
            political="Hartwell won 54% across Ohio with the Democratic Party.[2]",
            other="See https://x.y and the Stanton Savings Bank.",
        )
        once = clean_bundle(bundle, TAGGER, POLICY)
        again = clean_bundle(
            CategoryBundle(once.background, once.political, once.other), TAGGER, POLICY
        )
        assert (again.background, again.political, again.other) == (
            once.background,
            once.political,
            once.other,
        )

    def test_scan_invariants_on_mixed_text(self):
        bundle = CategoryBundle(
            background="Born in Springfield, Illinois in 1901 to Republican parents.",
            political="Won Illinois in 1947 for the Democratic Party with 61% support.[3]",
            other="Wrote 3 books about Chicago politics.",
        )
        clean = clean_bundle(bundle, TAGGER, POLICY)
        assert not find_digits(clean.political)
        assert not find_digits(clean.background)
        assert not find_stoplist_tokens(clean.political)
        assert not find_stoplist_tokens(clean.background)
        assert not find_gazetteer_phrases(clean.political)
        assert find_gazetteer_phrases(clean.background)  # Springfield, Illinois survive
