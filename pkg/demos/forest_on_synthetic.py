"""Train the forest regressor on the bundled synthetic halves.

The synthetic hardness labels are a noisy function of sentence length,
pronoun negation and a contrastive connective, so a working pipeline
should beat the constant-mean baseline clearly.
"""

import time

from wsc_hardness import forest, pipeline
from wsc_hardness.evaluation import evaluate, render_table
from wsc_hardness.features import FeatureSchema
from wsc_hardness.knowledge import load_resources
from wsc_hardness.schema import load_dataset, load_id_list, split_by_ids
from wsc_hardness.tables import bundled_path

resources = load_resources(bundled_path("resources"))
data = load_dataset(bundled_path("synthetic/halves.json"))
train, test = split_by_ids(data, load_id_list(bundled_path("synthetic/test.ids")))
print(f"{len(train)} training halves, {len(test)} held out")

t0 = time.perf_counter()
train_vectors = pipeline.featurize(train, resources)
print(f"feature extraction: {1000 * (time.perf_counter() - t0) / len(train):.1f} "
      f"ms per half")

hp = forest.ForestHyperparams(n_trees=100, seed=0)
model = pipeline.train_forest(train_vectors, train.labels(), hp)
rf = evaluate(pipeline.ForestPredictor(model, resources), test)
mean = pipeline.ConstantPredictor(train.labels().mean())
subset = load_id_list(bundled_path("synthetic/subset57.ids"))
rows = {
    "Forest": rf,
    "Forest (57-id subset)": evaluate(pipeline.ForestPredictor(model, resources),
                                      test, subset),
    "Training mean": evaluate(mean, test),
}
print(render_table(rows))

# Leave-one-component-out: which of the 12 components carry the signal?
# The labels depend on length, negation and the connective, so the blocks
# that see those (pattern, word counts, negation, polarity strings) lead.
test_vectors = pipeline.featurize(test, resources)
schema = FeatureSchema.fit(train_vectors)
ablation = forest.importance_by_ablation(
    schema.encode_matrix(train_vectors), train.labels(),
    schema.encode_matrix(test_vectors), test.labels(), schema.names,
    pipeline.component_groups(schema), forest.ForestHyperparams(n_trees=30))
worst = sorted(ablation.items(), key=lambda kv: -kv[1].mae_unit)[:4]
print()
print(render_table({f"without {k}": r for k, r in worst}))
