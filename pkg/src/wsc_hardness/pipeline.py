"""Glue between datasets, feature extraction and the two regressors.

Predictors expose ``predict(half)`` for evaluation and the split
``prepare(half)`` / ``predict_prepared(x)`` pair for latency timing.
"""

import numpy as np

from . import forest, lstm
from .features import (COMPONENTS, ExtractionConfig, FeatureSchema,
                       extract_all)
from .text import preprocess_sequence


def featurize(dataset, resources, cfg=ExtractionConfig()):
    """Feature vectors for every half, in dataset order."""
    return [extract_all(h, resources, cfg) for h in dataset.halves]


def join_labels(ids, vectors, dataset):
    """Keep the feature rows whose id has a label in ``dataset``."""
    labels = {h.id: h.hardness for h in dataset.halves
              if h.hardness is not None}
    rows = [(v, labels[i]) for i, v in zip(ids, vectors) if i in labels]
    if not rows:
        return [], np.zeros(0)
    vs, ys = zip(*rows)
    return list(vs), np.array(ys, dtype=np.float64)


def train_forest(vectors, y, hp=forest.ForestHyperparams()):
    schema = FeatureSchema.fit(vectors)
    model = forest.fit_forest(schema.encode_matrix(vectors), y, hp, schema)
    model.metadata["feature_names"] = list(schema.names)
    return model


def component_groups(schema, extra=None):
    groups = {c: [n for n in names if n in schema.names]
              for c, names in COMPONENTS.items()}
    groups.update(extra or {})
    return groups


class ForestPredictor:
    def __init__(self, model, resources, cfg=ExtractionConfig()):
        if model.schema is None:
            raise ValueError("forest model carries no feature schema")
        self.model = model
        self.resources = resources
        self.cfg = cfg

    def prepare(self, half):
        return self.model.schema.encode(
            extract_all(half, self.resources, self.cfg))

    def predict_prepared(self, x):
        return self.model.predict(x)

    def predict(self, half):
        return self.predict_prepared(self.prepare(half))


def half_tokens(half):
    return preprocess_sequence(half.sentence)


def sequences_for(dataset, vocab):
    return lstm.encode_many([half_tokens(h) for h in dataset.halves], vocab)


def train_lstm(dataset, cfg=lstm.TrainConfig(), units=87, embed_dim=50):
    """Build the vocabulary from ``dataset``, then fit a fresh model."""
    tokens = [half_tokens(h) for h in dataset.halves]
    vocab = lstm.build_vocabulary(tokens)
    model = lstm.init_model(len(vocab), embed_dim=embed_dim, units=units,
                            seed=cfg.seed, vocab=vocab)
    return lstm.train(model, lstm.encode_many(tokens, vocab),
                      dataset.labels(), cfg)


class LstmPredictor:
    def __init__(self, model):
        if model.vocab is None:
            raise ValueError("LSTM model carries no vocabulary")
        self.model = model

    def prepare(self, half):
        return lstm.encode(half_tokens(half), self.model.vocab)

    def predict_prepared(self, x):
        return float(lstm.predict(self.model, x))

    def predict(self, half):
        return self.predict_prepared(self.prepare(half))


class ConstantPredictor:
    """Fixed-value baseline, e.g. the adult human bar or a training mean."""

    def __init__(self, value):
        self.value = float(value)

    def prepare(self, half):
        return None

    def predict_prepared(self, x):
        return self.value

    def predict(self, half):
        return self.value
