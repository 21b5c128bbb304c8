"""Walk through feature extraction on the two classic schemas.

Run with ``python demos/worked_examples.py``.  Everything is offline: the
bundled fixture resources supply corpus counts, chains, polarity and hit
counts.
"""

from wsc_hardness.features import COMPONENTS, analyze, build_queries, extract_all
from wsc_hardness.knowledge import load_resources
from wsc_hardness.schema import load_dataset
from wsc_hardness.tables import bundled_path
from wsc_hardness.text import classify_sentence, extract_triples

resources = load_resources(bundled_path("resources"))
samples = load_dataset(bundled_path("samples.json")).by_id()

# The cat/mouse half.  The text layer splits the sentence at "because"
# and reads off one triple per clause plus a link between the clauses.
catch = samples["catch-a"]
print(catch.sentence)
for t in extract_triples(catch.sentence):
    print("   triple:", t.as_strings())
shape = classify_sentence(catch.sentence)
print("   type/pattern:", shape.sentence_type, "/", shape.pattern)

# Six search-engine style queries are formed from the candidates, the verb
# governing the pronoun, the rest of the question and its adjective.
print("   queries:", build_queries(analyze(catch)).as_tuple())

# The councilmen halves exercise the knowledge-based components: the
# narrative chain refuse-o / advocate-s points at the demonstrators, and
# polarity projection from "refuse" (negative) does the same.
for hid in ("councilmen-1", "councilmen-2"):
    v = extract_all(samples[hid], resources)
    print()
    print(samples[hid].sentence)
    for comp in ("narrative-chains", "polarity-rules", "discourse-connective"):
        vals = {n: v[n] for n in COMPONENTS[comp]}
        print(f"   {comp:22s} covered={v.coverage[comp]!s:5s} {vals}")

# A full vector has 47 entries; undecidable components fall back to their
# sentinels (-1, 0 or "neutral-neutral") and are flagged as not covered.
v = extract_all(catch, resources)
missing = [c for c, ok in v.coverage.items() if not ok]
print()
print(f"catch-a: {len(v.values)} features, components without evidence: "
      f"{missing}")
