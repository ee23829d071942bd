"""Mean/sd/coverage of query concreteness for the reference query sets.

usage: concreteness_oracle.py LEXICON_TSV QUERIES_JSON > concreteness_expected.json
"""
import json
import re
import statistics
import sys

WORD = re.compile(r"[a-z0-9]+(?:['-][a-z0-9]+)*")


def load_lexicon(path):
    lex = {}
    for line in open(path, encoding="utf-8"):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        word, rating = line.split("\t")
        lex[word.strip()] = float(rating)
    return lex


def singular(w):
    if len(w) > 4 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 3 and w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


def rating(lex, w):
    if w in lex:
        return lex[w]
    return lex.get(singular(w))


def score(queries, lex):
    words = covered = 0
    per_query = []
    for q in queries:
        toks = WORD.findall(q.lower())
        words += len(toks)
        rated = [r for r in (rating(lex, t) for t in toks) if r is not None]
        covered += len(rated)
        if rated:
            per_query.append(sum(rated) / len(rated))
    sd = statistics.stdev(per_query) if len(per_query) > 1 else 0.0
    return {"mean": statistics.fmean(per_query), "sd": sd, "coverage": covered / words}


def main():
    lex = load_lexicon(sys.argv[1])
    sets = json.load(open(sys.argv[2], encoding="utf-8"))["sets"]
    out = {
        "with_pa": score([q for s in sets for q in s["with_pa"]], lex),
        "without_pa": score([q for s in sets for q in s["without_pa"]], lex),
    }
    json.dump(out, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
