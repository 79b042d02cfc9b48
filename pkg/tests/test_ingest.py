import pytest

from polariscope.corpus import Chamber, PartyKind
from polariscope.ingest import (
    EmptyPageError,
    FetchCache,
    FetchMode,
    MissingFixtureError,
    PageSource,
    RawPage,
    RosterEntry,
    RosterParseError,
    fetch_page,
    load_dump,
    merge_identities,
    normalize_party,
    parse_roster,
    parse_sections,
)

ROSTER_HTML = """
<html><body>
<h2>Senate</h2>
<table>
<tr><th>Name</th><th>Party</th><th>State</th></tr>
<tr><td><a href="/wiki/Ada_Li" title="Ada Li">Ada Li</a></td><td>Democratic</td><td>Ohio</td></tr>
<tr><td><a href="/wiki/Bo_Reyes" title="Bo Reyes">Bo Reyes</a></td><td>Democratic</td><td>Utah</td></tr>
<tr><td><a href="/wiki/Cy_Moore" title="Cy Moore">Cy Moore</a></td><td>Republican</td><td>Iowa</td></tr>
</table>
</body></html>
"""

BIO_HTML = """
<html><body>
<p>Ada Li is a senator.</p>
<table class="infobox"><tr><td>noise</td></tr></table>
<h2>Early life</h2>
<p>Born in Ohio.<sup class="reference">[1]</sup></p>
<h2>Political career</h2>
<p>Elected in 2010.</p>
<h3>Committee work</h3>
<p>Finance committee member.</p>
<h2>Awards</h2>
<p>Civic medal.</p>
</body></html>
"""


class TestFetchCache:
    def test_cache_only_hit(self, tmp_path):
        cache = FetchCache(tmp_path)
        cache.put(RawPage(title="Ada Li", payload="<html>x</html>", source=PageSource.LIVE))
        page = fetch_page("Ada Li", cache, FetchMode.CACHE_ONLY)
        assert page.payload == "<html>x</html>"
        assert page.source is PageSource.DUMP

    def test_cache_determinism(self, tmp_path):
        cache = FetchCache(tmp_path)
        cache.put(RawPage(title="Ada Li", payload="<html>x</html>", source=PageSource.LIVE))
        first = fetch_page("Ada Li", cache, FetchMode.LIVE_THEN_CACHE)
        second = fetch_page("Ada Li", cache, FetchMode.LIVE_THEN_CACHE)
        assert first.payload == second.payload

    def test_cache_only_miss(self, tmp_path):
        with pytest.raises(MissingFixtureError):
            fetch_page("Nobody", FetchCache(tmp_path), FetchMode.CACHE_ONLY)

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POLARISCOPE_CACHE", str(tmp_path / "elsewhere"))
        cache = FetchCache()
        assert cache.root == tmp_path / "elsewhere"


class TestParseRoster:
    def test_three_members_with_parties(self):
        page = RawPage(title="r", payload=ROSTER_HTML, source=PageSource.FIXTURE)
        entries = parse_roster(page, 116)
        assert len(entries) == 3
        assert [e.party_text for e in entries] == ["Democratic", "Democratic", "Republican"]
        assert entries[0].page_title == "Ada Li"
        assert all(e.chamber is Chamber.SENATE for e in entries)

    def test_empty_table_body(self):
        html = "<html><h2>Senate</h2><table><tr><th>Name</th><th>Party</th></tr></table></html>"
        page = RawPage(title="r", payload=html, source=PageSource.FIXTURE)
        with pytest.raises(RosterParseError) as err:
            parse_roster(page, 116)
        assert "candidate table headers" in str(err.value)

    def test_member_in_two_chambers_yields_two_entries(self):
        html = ROSTER_HTML.replace(
            "</body>",
            """
            <h2>House of Representatives</h2>
            <table>
            <tr><th>Name</th><th>Party</th><th>State</th></tr>
            <tr><td><a title="Ada Li">Ada Li</a></td><td>Democratic</td><td>Ohio</td></tr>
            </table></body>
            """,
        )
        page = RawPage(title="r", payload=html, source=PageSource.FIXTURE)
        entries = [e for e in parse_roster(page, 116) if e.name == "Ada Li"]
        assert {e.chamber for e in entries} == {Chamber.SENATE, Chamber.HOUSE}

    def test_duplicate_rows_collapse(self):
        dup = ROSTER_HTML.replace(
            "<tr><td><a href=\"/wiki/Bo_Reyes\"",
            "<tr><td><a href=\"/wiki/Ada_Li\" title=\"Ada Li\">Ada Li</a></td>"
            "<td>Democratic</td><td>Ohio</td></tr><tr><td><a href=\"/wiki/Bo_Reyes\"",
        )
        page = RawPage(title="r", payload=dup, source=PageSource.FIXTURE)
        names = [e.name for e in parse_roster(page, 116)]
        assert names.count("Ada Li") == 1

    def test_wikitext_table(self):
        wikitext = "\n".join(
            [
                "== Senate ==",
                "{| class=wikitable",
                "! Name !! Party !! State",
                "|-",
                "| [[Ada Li]] || Democratic || Ohio",
                "|-",
                "| [[Cy Moore|C. Moore]] || Republican || Iowa",
                "|}",
            ]
        )
        page = RawPage(title="r", payload=wikitext, source=PageSource.FIXTURE)
        entries = parse_roster(page, 90)
        assert [(e.name, e.page_title) for e in entries] == [
            ("Ada Li", "Ada Li"),
            ("C. Moore", "Cy Moore"),
        ]

    def test_congress_out_of_scope_rejected(self):
        with pytest.raises(ValueError):
            RosterEntry(name="X", party_text="D", state="", chamber=Chamber.SENATE, congress=30)


class TestParseSections:
    def test_headings_plus_lead(self):
        page = RawPage(title="Ada Li", payload=BIO_HTML, source=PageSource.FIXTURE)
        sections = parse_sections(page)
        assert list(sections) == ["__lead__", "Early life", "Political career", "Awards"]
        assert sections["__lead__"] == "Ada Li is a senator."
        # h3 subsection folded into its h2; infobox and reference sup dropped
        assert "Finance committee member." in sections["Political career"]
        assert "[1]" not in sections["Early life"]
        assert "noise" not in " ".join(sections.values())

    def test_lead_only_page(self):
        page = RawPage(title="x", payload="<p>Just a lead.</p>", source=PageSource.FIXTURE)
        assert parse_sections(page) == {"__lead__": "Just a lead."}

    def test_duplicate_heading_suffixed(self):
        html = "<p>lead</p><h2>Career</h2><p>a</p><h2>Career</h2><p>b</p>"
        page = RawPage(title="x", payload=html, source=PageSource.FIXTURE)
        sections = parse_sections(page)
        assert list(sections) == ["__lead__", "Career", "Career (2)"]
        assert sections["Career (2)"] == "b"

    def test_empty_page(self):
        page = RawPage(title="x", payload="<div>  </div>", source=PageSource.FIXTURE)
        with pytest.raises(EmptyPageError):
            parse_sections(page)

    def test_order_preserved_from_dump(self):
        page = RawPage(
            title="x",
            payload=[("", "lead"), ("Zeta", "z"), ("Alpha", "a")],
            source=PageSource.DUMP,
        )
        assert list(parse_sections(page)) == ["__lead__", "Zeta", "Alpha"]


class TestMergeIdentities:
    def entry(self, congress, party="Democratic", chamber=Chamber.SENATE, name="Ada Li"):
        return RosterEntry(
            name=name, party_text=party, state="Ohio", chamber=chamber,
            congress=congress, page_title=name,
        )

    def test_terms_unioned(self):
        pages = {"Ada Li": {"__lead__": "text"}}
        result = merge_identities([self.entry(116), self.entry(117)], pages)
        assert len(result.politicians) == 1
        assert result.politicians[0].terms == frozenset({116, 117})
        assert result.politicians[0].phases == frozenset({4})

    def test_party_normalization_table(self):
        assert normalize_party("Democrat").kind is PartyKind.DEMOCRATIC
        assert normalize_party("Republican").kind is PartyKind.REPUBLICAN
        other = normalize_party("Independent")
        assert other.kind is PartyKind.OTHER and other.other_label == "Independent"

    def test_unresolved_title_is_gap_not_fatal(self):
        result = merge_identities([self.entry(116)], {})
        assert result.politicians == []
        assert result.gaps == ["Ada Li"]

    def test_party_switch_warned_and_latest_wins(self):
        pages = {"Ada Li": {"__lead__": "text"}}
        entries = [self.entry(116, party="Republican"), self.entry(117, party="Democratic")]
        result = merge_identities(entries, pages)
        assert result.politicians[0].party.kind is PartyKind.DEMOCRATIC
        assert any("party changed" in w for w in result.warnings)

    def test_slug_collision_gets_state_suffix(self):
        pages = {"Ada Li": {"__lead__": "a"}, "Ada  Li": {"__lead__": "b"}}
        entries = [
            self.entry(116),
            RosterEntry(name="Ada Li", party_text="Republican", state="Iowa",
                        chamber=Chamber.HOUSE, congress=116, page_title="Ada  Li"),
        ]
        result = merge_identities(entries, pages)
        ids = sorted(p.id for p in result.politicians)
        assert len(ids) == 2 and len(set(ids)) == 2
        assert "ada-li" in ids


def test_load_dump_roundtrip(tmp_path):
    path = tmp_path / "dump.jsonl"
    path.write_text(
        '{"title": "Ada Li", "page_id": 7, "sections": [{"heading": "", "text": "lead"}]}\n',
        "utf-8",
    )
    pages = load_dump(path)
    assert pages[0].title == "Ada Li"
    assert parse_sections(pages[0]) == {"__lead__": "lead"}


def test_load_dump_malformed_line_names_position(tmp_path):
    path = tmp_path / "dump.jsonl"
    path.write_text('{"title": "x"}\n', "utf-8")
    with pytest.raises(ValueError) as err:
        load_dump(path)
    assert ":1:" in str(err.value)
