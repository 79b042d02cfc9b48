"""Regenerates the bundled fixture corpus (12 fictional politicians).

The texts are crafted to exercise the whole pipeline: gazetteer locations in
both background and political sections, person/org mentions, digits,
citation markers, URLs, party terms, duplicate headings, an unmapped
heading, and shared political vocabulary across every (party, phase) cell.

Run from the repo root:  python scripts/gen_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "polariscope" / "data" / "fixtures"

# name, party_text per congress, state, chamber per congress
POLITICIANS = [
    {
        "name": "Ruth Calloway",
        "rosters": [(60, "Democratic", "Maine", "Senate")],
        "sections": [
            ["", "Ruth Calloway (1858-1931) was an American lawyer and politician who "
                 "served as a United States Senator from Maine.[1]"],
            ["Early life and education",
             "Ruth Calloway was born in Portland, Maine in 1858. Her father, "
             "Thomas Calloway, taught at Bowdoin College. She studied law and was "
             "admitted to the bar in 1884, one of 3 women in her class.[2]"],
            ["Senate career",
             "Calloway entered the Senate after the election of 1903 and served on the "
             "Finance Committee. She campaigned for tariff reform and argued that "
             "immigration built the labor force of Maine mills. Her speeches on "
             "immigration and naturalization law drew crowds of 2000 people.[3] She "
             "voted for the banking bill and pressed the Democratic platform on wages, "
             "pensions and public schools across Maine."],
            ["Death and legacy",
             "Calloway died in 1931. A library in Portland is named for her.[4]"],
        ],
    },
    {
        "name": "Walter Duran",
        "rosters": [(60, "Republican", "Kansas", "House")],
        "sections": [
            ["", "Walter Duran (1861-1940) was an American farmer and politician from "
                 "Kansas who served in the House of Representatives."],
            ["Early life",
             "Walter Duran was born near Topeka, Kansas in 1861 and raised on a wheat "
             "farm. He attended Baker University for 2 years before returning to the "
             "farm.[1]"],
            ["Political career",
             "Duran won the election of 1903 on a Republican platform of tariff "
             "protection and sound banking. In Congress he defended railroad "
             "regulation, opposed loose immigration law, and championed the budget "
             "discipline of the party. He told farmers across Kansas that taxes and "
             "tariff policy decided the price of wheat.[2]"],
            ["Business ventures",
             "After politics Duran ran the Duran Grain Company and sat on the board "
             "of a Topeka bank, earning some 40000 dollars a year.[3]"],
        ],
    },
    {
        "name": "Samuel Okafor",
        "rosters": [(80, "Democratic", "Illinois", "House")],
        "sections": [
            ["", "Samuel Okafor (1901-1977) was an American teacher and politician "
                 "from Illinois who served in the House of Representatives."],
            ["Childhood",
             "Samuel Okafor was born in Chicago, Illinois in 1901. His mother, "
             "Dorothy Okafor, ran a grocery near the stockyards.[1]"],
            ["Education",
             "Okafor worked his way through Northwestern University, graduating in "
             "1924, and taught civics in Chicago schools for 12 years."],
            ["Political career",
             "Okafor won his seat in the election of 1947 as a Democrat. He backed "
             "labor unions, public housing and healthcare for veterans, and urged a "
             "fair immigration law for postwar refugees. He steered the Democratic "
             "education bill through committee and defended school funding across "
             "Illinois against budget cuts of 30%.[2]"],
            ["Awards and honors",
             "The city of Chicago gave Okafor its civic medal in 1960.[3]"],
        ],
    },
    {
        "name": "Harold Jennings",
        "rosters": [(80, "Republican", "Ohio", "Senate")],
        "sections": [
            ["", "Harold Jennings (1895-1969) was an American industrialist and "
                 "politician who served as a United States Senator from Ohio."],
            ["Early life",
             "Harold Jennings was born in Dayton, Ohio in 1895. He studied engineering "
             "at Ohio State University and ran the Jennings Tool Company with 400 "
             "workers.[1]"],
            ["Tenure",
             "Jennings entered the Senate after the election of 1947 as a Republican. "
             "He fought for lower taxes, a balanced budget and strong national defense, "
             "and warned that loose immigration policy strained the labor market of "
             "Ohio. He wrote the trade bill of 1951 and defended tariff law before the "
             "Finance Committee.[2] See https://archive.example.org/jennings for his "
             "papers."],
            ["Controversies",
             "Critics said Jennings favored the GOP donors of Cleveland in awarding "
             "2 defense contracts.[3]"],
        ],
    },
    {
        "name": "Dorothy Mosley",
        "rosters": [(80, "Republican", "Indiana", "House")],
        "sections": [
            ["", "Dorothy Mosley (1903-1988) was an American newspaper editor and "
                 "politician from Indiana who served in the House of Representatives."],
            ["Family",
             "Dorothy Mosley was born in Indianapolis, Indiana in 1903. She married "
             "the publisher Frank Mosley and edited the family paper for 15 years.[1]"],
            ["Political positions",
             "Mosley won the election of 1947 as a Republican. She pressed for budget "
             "restraint, lower taxes on small business and a cautious immigration "
             "law. She opposed the labor bill of 1949 and defended trade policy that "
             "protected Indiana factories.[2]"],
            ["Later career",
             "After leaving Congress, Mosley chaired the Indiana Press Association "
             "and wrote 3 books on politics.[3]"],
        ],
    },
    {
        "name": "Edward Pratt",
        "rosters": [(95, "Republican", "Texas", "Senate")],
        "sections": [
            ["", "Edward Pratt (1921-2003) was an American rancher and politician who "
                 "served as a United States Senator from Texas."],
            ["Early life",
             "Edward Pratt was born outside Austin, Texas in 1921 and flew 30 "
             "missions in the war before taking over the family ranch.[1]"],
            ["Congressional career",
             "Pratt won the election of 1977 as a Republican. He campaigned on energy "
             "production, lower taxes and border security, and argued that immigration "
             "enforcement protected Texas wages. He moved the defense budget through "
             "the Senate and fought regulation of the oil trade.[2]"],
            ["Publications",
             "Pratt published a memoir in 1990 that sold 50000 copies.[3]"],
        ],
    },
    {
        "name": "Helen Forsythe",
        "rosters": [(95, "Democratic", "Oregon", "Senate"), (116, "Democratic", "Oregon", "Senate")],
        "sections": [
            ["", "Helen Forsythe (born 1942) is an American professor and politician "
                 "who has served as a United States Senator from Oregon."],
            ["Early life and career",
             "Helen Forsythe was born in Portland, Oregon in 1942. She taught "
             "economics at Reed College for 9 years before entering politics.[1]"],
            ["Political career",
             "Forsythe first won election in 1977 as a Democrat and returned to the "
             "Senate decades later. She championed healthcare reform, education "
             "funding and labor rights, and called immigration the engine of the "
             "Oregon economy. She wrote the climate bill and defended voting rights "
             "law on the Senate floor.[2]"],
            ["Committee assignments",
             "Forsythe sits on the Budget Committee and the Commerce Committee."],
            ["Personal life",
             "Forsythe lives in Portland with her family and hikes in Oregon every "
             "summer.[3]"],
        ],
    },
    {
        "name": "Sarah Hartwell",
        "rosters": [(116, "Democratic", "Ohio", "Senate"), (117, "Democratic", "Ohio", "Senate")],
        "sections": [
            ["", "Sarah Hartwell (born 1962) is an American attorney and politician "
                 "serving as a United States Senator from Ohio."],
            ["Early life",
             "Sarah Hartwell was born in Dayton, Ohio in 1962. Her father, James "
             "Hartwell, worked at the Miami Valley Steel Company, and her mother "
             "taught school in Dayton. She finished first among 300 students at "
             "Kenyon College.[1]"],
            ["2010 election campaign",
             "Hartwell ran for the Senate in 2010, winning 54% of the vote.[2] Her "
             "campaign pressed healthcare coverage, gun violence prevention and "
             "background checks, and a humane immigration law for Ohio families."],
            ["Political positions",
             "Hartwell backs universal healthcare, education funding, labor unions "
             "and voting rights. She argues that immigration strengthens the economy "
             "and that climate policy creates jobs. She supports gun safety checks "
             "and champions the Democratic platform on equality.[3]"],
            ["Awards",
             "Hartwell received the civic leadership medal of Cleveland in 2018.[4]"],
        ],
    },
    {
        "name": "David Bell",
        "rosters": [(116, "Democrat", "Michigan", "House"), (117, "Democratic", "Michigan", "House")],
        "sections": [
            ["", "David Bell (born 1975) is an American engineer and politician from "
                 "Michigan serving in the House of Representatives."],
            ["Career",
             "David Bell was born in Detroit, Michigan in 1975 and built electric "
             "motors at a Detroit plant for 11 years.[1]"],
            ["Career",
             "Bell later ran a small engineering firm with 25 employees before "
             "entering politics."],
            ["Political career",
             "Bell won the election of 2018 as a Democrat. He pushes for labor "
             "unions, manufacturing jobs, healthcare coverage and climate "
             "investment, and says immigration keeps Michigan factories running. He "
             "voted for the infrastructure bill and gun background checks.[2]"],
        ],
    },
    {
        "name": "George Stanton",
        "rosters": [(116, "Republican", "Tennessee", "Senate"), (117, "Republican", "Tennessee", "Senate")],
        "sections": [
            ["", "George Stanton (born 1958) is an American banker and politician "
                 "serving as a United States Senator from Tennessee."],
            ["Early life",
             "George Stanton was born in Memphis, Tennessee in 1958. He ran the "
             "Stanton Savings Bank in Nashville for 20 years.[1]"],
            ["Political career",
             "Stanton won the election of 2014 as a Republican. He campaigns on tax "
             "cuts, deregulation, border security and gun rights, and argues that "
             "immigration enforcement protects Tennessee workers. He wrote the "
             "banking bill and defends the defense budget and free trade.[2]"],
            ["Electoral history",
             "Stanton won reelection in 2020 with 61% of the vote across "
             "Tennessee.[3]"],
            ["Honors",
             "The Memphis chamber of commerce honored Stanton in 2016.[4]"],
        ],
    },
    {
        "name": "Nancy Whitfield",
        "rosters": [(116, "Republican", "Arizona", "House"), (117, "Republican", "Arizona", "Senate")],
        "sections": [
            ["", "Nancy Whitfield (born 1968) is an American rancher and politician "
                 "from Arizona who has served in both chambers of Congress."],
            ["Education",
             "Nancy Whitfield was born in Tucson, Arizona in 1968 and studied "
             "agriculture at Arizona State University.[1]"],
            ["Congressional career",
             "Whitfield won her House seat in 2018 and moved to the Senate in 2021 "
             "as a Republican. She campaigns on border security, immigration "
             "enforcement, gun rights, water policy and lower taxes for Arizona "
             "ranchers. She opposed the climate bill and backs the defense budget.[2]"],
            ["Political positions",
             "Whitfield supports gun rights, strict immigration checks and trade "
             "deals that protect Arizona copper mines. The GOP caucus made her a "
             "deputy whip in 2022.[3]"],
            ["Controversies",
             "A watchdog said Whitfield understated ranch income of 90000 dollars "
             "in 2019.[4]"],
        ],
    },
    {
        "name": "Eleanor Vance",
        "rosters": [(116, "Independent", "Vermont", "House"), (117, "Independent", "Vermont", "House")],
        "sections": [
            ["", "Eleanor Vance (born 1971) is an American bookseller and politician "
                 "from Vermont serving in the House of Representatives as an "
                 "independent."],
            ["Early life",
             "Eleanor Vance was born in Burlington, Vermont in 1971 and ran a "
             "bookshop for 14 years.[1]"],
            ["Political career",
             "Vance won the election of 2018 without a party. She campaigns on "
             "healthcare access, rural broadband, immigration reform and campaign "
             "finance law, and caucuses case by case on the budget.[2]"],
            ["Hobbies",
             "Vance collects maps of Vermont and paddles the lake every June."],
            ["Writings",
             "Vance has written 2 essay collections about small towns.[3]"],
        ],
    },
]


def write_dump() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "dump.jsonl", "w", encoding="utf-8") as fh:
        for i, p in enumerate(POLITICIANS):
            record = {
                "title": p["name"],
                "page_id": 1000 + i,
                "sections": [{"heading": h, "text": t} for h, t in p["sections"]],
            }
            fh.write(json.dumps(record, ensure_ascii=True) + "\n")


def write_rosters() -> None:
    rosters_dir = OUT / "rosters"
    rosters_dir.mkdir(parents=True, exist_ok=True)
    by_congress: dict[int, dict[str, list]] = {}
    for p in POLITICIANS:
        for congress, party, state, chamber in p["rosters"]:
            by_congress.setdefault(congress, {"Senate": [], "House": []})
            by_congress[congress][chamber].append((p["name"], party, state))
    for congress, chambers in sorted(by_congress.items()):
        rows = ['<html><body>', f"<h1>Members of the {congress}th Congress</h1>"]
        for chamber, heading in (("Senate", "Senate"), ("House", "House of Representatives")):
            members = chambers[chamber]
            if not members:
                continue
            rows.append(f"<h2>{heading}</h2>")
            rows.append("<table>")
            rows.append("<tr><th>Name</th><th>Party</th><th>State</th></tr>")
            for name, party, state in members:
                href = "/wiki/" + name.replace(" ", "_")
                rows.append(
                    f'<tr><td><a href="{href}" title="{name}">{name}</a></td>'
                    f"<td>{party}</td><td>{state}</td></tr>"
                )
            rows.append("</table>")
        rows.append("</body></html>")
        (rosters_dir / f"congress_{congress}.html").write_text("\n".join(rows), "utf-8")


def _slug(name: str) -> str:
    return name.lower().replace(" ", "-")


def write_external() -> None:
    ext_dir = OUT / "external"
    ext_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(42)
    dim = 8
    axis = np.zeros(dim)
    axis[0] = 1.0
    for kind, spread in (("political", 0.25), ("background", 0.55)):
        records = []
        for p in POLITICIANS:
            party = p["rosters"][-1][1]
            if party.startswith("Democrat"):
                center = axis
            elif party == "Republican":
                center = -axis
            else:
                center = np.zeros(dim)
            vec = center + rng.normal(0.0, spread, dim)
            records.append({"id": _slug(p["name"]), "vector": [round(float(x), 6) for x in vec]})
        with open(ext_dir / f"{kind}.jsonl", "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r) + "\n")
        manifest = {
            "dataset_kind": kind,
            "file": f"{kind}.jsonl",
            "normalized": False,
            "note": f"fixture transformer vectors for the {kind} texts (deterministic seed 42)",
        }
        (ext_dir / f"{kind}.manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", "utf-8"
        )


ATTENTION = [
    {
        "id": "sarah-hartwell",
        "tokens": ["<s>", "public", "healthcare", "coverage", "gun", "violence",
                   "checks", "education", "union", "immigration", "ohio", "</s>"],
        "scores": [9.5, 0.41, 0.92, 0.55, 0.88, 0.83, 0.79, 0.47, 0.36, 0.95, 0.30, 6.1],
        "layer_note": "last layer, global attention with the sequence-start token",
    },
    {
        "id": "george-stanton",
        "tokens": ["<s>", "tax", "cuts", "border", "security", "gun", "rights",
                   "banking", "defense", "budget", "trade", "</s>"],
        "scores": [8.8, 0.90, 0.62, 0.87, 0.66, 0.71, 0.58, 0.52, 0.49, 0.93, 0.44, 5.8],
        "layer_note": "last layer, global attention with the sequence-start token",
    },
    {
        "id": "eleanor-vance",
        "tokens": ["<s>", "healthcare", "access", "rural", "broadband",
                   "immigration", "reform", "finance", "law", "</s>"],
        "scores": [7.9, 0.84, 0.51, 0.63, 0.77, 0.81, 0.49, 0.38, 0.35, 5.2],
        "layer_note": "last layer, global attention with the sequence-start token",
    },
]


def write_attention() -> None:
    with open(OUT / "attention.jsonl", "w", encoding="utf-8") as fh:
        for record in ATTENTION:
            fh.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    write_dump()
    write_rosters()
    write_external()
    write_attention()
    print(f"fixtures written under {OUT}")
