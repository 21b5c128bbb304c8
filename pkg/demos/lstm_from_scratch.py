"""The sequence regressor: gradient check first, then a short training run.

The LSTM is plain numpy.  Before trusting a training curve it is worth
confirming that backpropagation through time agrees with finite
differences.
"""

import numpy as np

from wsc_hardness import lstm, pipeline
from wsc_hardness.schema import load_dataset
from wsc_hardness.tables import bundled_path

# A tiny model keeps the finite-difference loop quick.
model = lstm.init_model(20, embed_dim=4, units=3, input_dropout=0.0,
                        recurrent_dropout=0.0, seed=1)
seqs = np.zeros((4, lstm.SEQ_LEN), dtype=np.int64)
seqs[:, :5] = np.random.default_rng(0).integers(1, 21, size=(4, 5))
err = lstm.gradient_check(model, (seqs, np.full(4, 0.5)))
print(f"max relative gradient error over 200 coordinates: {err:.2e}")

# Now the real architecture (87 units, 50-d embeddings) on 200 synthetic
# halves.  The last 30 % of rows are held back for validation.
data = load_dataset(bundled_path("synthetic/halves.json"))
data = data.subset(data.ids[:200])
cfg = lstm.TrainConfig(epochs=60, seed=0)
model, hist = pipeline.train_lstm(data, cfg)
print(f"vocabulary: {len(model.vocab)} lemmas")
for epoch, tr, va in hist.rows[::10] + hist.rows[-1:]:
    print(f"epoch {epoch:3d}  train MAE {tr:.4f}  val MAE {va:.4f}")

# Padding never changes a prediction: masked steps leave the state alone.
predictor = pipeline.LstmPredictor(model)
x = predictor.prepare(data.halves[0])
padded = np.concatenate([x, np.zeros(20, dtype=np.int64)])
assert lstm.forward(model, x) == lstm.forward(model, padded)
print(f"{data.halves[0].sentence!r} -> {predictor.predict(data.halves[0]):.3f}"
      f" (label {data.halves[0].hardness})")
