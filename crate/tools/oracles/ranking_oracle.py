"""Reference discipline scores for the frozen link-embedding fixture.

Reads crates/server/fixtures/oracles/ranking_input.json and writes
ranking_expected.json beside it. Computed with plain floats and math.fsum,
independent of the Rust implementation.
"""
import json
import math
import pathlib

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "crates/server/fixtures/oracles"

CASES = [
    {"beta": 1.0, "papers_collected": {}, "eqs_queried": {}},
    {
        "beta": 1.0,
        "papers_collected": {"Medicine": 3, "Psychology": 1},
        "eqs_queried": {"Psychology": 2, "Sociology": 1},
    },
    {
        "beta": 0.5,
        "papers_collected": {"Education": 2, "Unknown": 1},
        "eqs_queried": {"Computer Science": 4, "Medicine": 1},
    },
    {"beta": 2.0, "papers_collected": {"Sociology": 5}, "eqs_queried": {}},
]


def cosine(a, b):
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(x * x for x in b))
    if na == 0 or nb == 0:
        return 0.0
    return math.fsum(x * y for x, y in zip(a, b)) / (na * nb)


def table(doc, case):
    topic = doc["topic_vector"]
    groups = {}
    for p in doc["papers"]:
        for d in p["disciplines"]:
            groups.setdefault(d, []).append(cosine(p["vector"], topic))
    rows = []
    for d, sims in groups.items():
        u = case["papers_collected"].get(d, 0) + case["eqs_queried"].get(d, 0)
        e = 1.0 / (u + 1)
        v = math.fsum(sims) / len(sims)
        rows.append({"discipline": d, "engagement": u, "exploration_score": e,
                     "relevance_score": v, "combined_score": case["beta"] * v + e})
    rows.sort(key=lambda r: (-r["combined_score"], r["discipline"]))
    return rows


def main():
    doc = json.loads((FIXTURES / "ranking_input.json").read_text())
    out = {"cases": [dict(case, table=table(doc, case)) for case in CASES]}
    (FIXTURES / "ranking_expected.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
