"""LSTM hardness regressor written directly in numpy.

Embedding -> one LSTM layer -> one linear unit.  Padding id 0 is masked:
a masked step copies the previous state, so trailing padding never moves
the prediction.  Dropout uses one inverted mask per sequence for the
inputs and one for the recurrent state.  Gate order inside the stacked
weight matrices is (input, forget, cell, output).
"""

import csv
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatch, HyperparameterError, ModelFormatError,
                     ModelVersionError, TrainingError)

MAGIC = b"WSCHRF-LSTM"
FORMAT_VERSION = 1
SEQ_LEN = 50
PARAM_NAMES = ("embedding", "W", "U", "b", "w_out", "b_out")
GATES = ("i", "f", "g", "o")


class Vocabulary:
    """Lemma -> id, 1-based in first-occurrence order; 0 is padding/unknown."""

    def __init__(self, tokens=()):
        self.tokens = []
        self.ids = {}
        for t in tokens:
            self.add(t)

    def add(self, token):
        if token not in self.ids:
            self.tokens.append(token)
            self.ids[token] = len(self.tokens)
        return self.ids[token]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.ids

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def id_of(self, token):
        return self.ids.get(token, 0)


def build_vocabulary(sentences):
    vocab = Vocabulary()
    for sent in sentences:
        for tok in sent:
            vocab.add(tok)
    return vocab


def encode(tokens, vocab, length=SEQ_LEN):
    ids = [vocab.id_of(t) for t in tokens][:length]
    out = np.zeros(length, dtype=np.int64)
    out[:len(ids)] = ids
    return out


def encode_many(sentences, vocab, length=SEQ_LEN):
    if not sentences:
        return np.zeros((0, length), dtype=np.int64)
    return np.stack([encode(s, vocab, length) for s in sentences])


def sigmoid(z):
    # split form avoids overflow warnings for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LstmModel:
    params: dict
    input_dropout: float = 0.2
    recurrent_dropout: float = 0.2
    seed: int = 0
    vocab: Vocabulary = None

    @property
    def units(self):
        return self.params["U"].shape[0]

    @property
    def embed_dim(self):
        return self.params["embedding"].shape[1]

    @property
    def n_ids(self):
        return self.params["embedding"].shape[0]

    def copy(self):
        return LstmModel({k: v.copy() for k, v in self.params.items()},
                         self.input_dropout, self.recurrent_dropout,
                         self.seed, self.vocab)

    def check(self):
        H, D = self.units, self.embed_dim
        shapes = {"embedding": (self.n_ids, D), "W": (D, 4 * H),
                  "U": (H, 4 * H), "b": (4 * H,), "w_out": (H,),
                  "b_out": (1,)}
        for k, s in shapes.items():
            if self.params[k].shape != s:
                raise DimensionMismatch(f"{k} has shape "
                                        f"{self.params[k].shape}, want {s}")
            if not np.isfinite(self.params[k]).all():
                raise TrainingError(f"parameter {k} is not finite")
        if self.vocab is not None and len(self.vocab) + 1 != self.n_ids:
            raise DimensionMismatch("vocabulary does not match embedding rows")


def _glorot(rng, fan_in, fan_out):
    lim = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


def _orthogonal(rng, rows, cols):
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def init_model(vocab_size, embed_dim=50, units=87, input_dropout=0.2,
               recurrent_dropout=0.2, seed=0, vocab=None):
    for name, p in (("input_dropout", input_dropout),
                    ("recurrent_dropout", recurrent_dropout)):
        if not 0.0 <= p < 1.0:
            raise HyperparameterError(f"{name} must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    H = units
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0
    params = {
        "embedding": rng.uniform(-0.05, 0.05, size=(vocab_size + 1, embed_dim)),
        "W": _glorot(rng, embed_dim, 4 * H),
        "U": _orthogonal(rng, H, 4 * H),
        "b": b,
        "w_out": _glorot(rng, H, 1)[:, 0],
        "b_out": np.zeros(1),
    }
    model = LstmModel(params, input_dropout, recurrent_dropout, seed, vocab)
    model.check()
    return model


def _as_batch(model, seqs):
    seqs = np.asarray(seqs)
    if seqs.ndim == 1:
        seqs = seqs[None, :]
    if seqs.ndim != 2:
        raise DimensionMismatch(f"expected (batch, steps) ids, got {seqs.shape}")
    if seqs.size and (seqs.min() < 0 or seqs.max() >= model.n_ids):
        raise DimensionMismatch(f"token id outside [0, {model.n_ids})")
    return seqs.astype(np.int64)


def _forward(model, seqs, masks=None):
    """Run the recurrence; returns outputs and the cache for backprop."""
    p = model.params
    H = model.units
    B, T = seqs.shape
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    keep_x, keep_h = masks if masks is not None else (None, None)
    steps = []
    for t in range(T):
        m = seqs[:, t] != 0
        if not m.any():
            steps.append(None)
            continue
        x = p["embedding"][seqs[:, t]]
        if keep_x is not None:
            x = x * keep_x
        hd = h if keep_h is None else h * keep_h
        z = x @ p["W"] + hd @ p["U"] + p["b"]
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        mm = m[:, None]
        steps.append((m, x, hd, i, f, g, o, c, tc))
        c = np.where(mm, c_new, c)
        h = np.where(mm, h_new, h)
    y = h @ p["w_out"] + p["b_out"][0]
    return y, (seqs, masks, steps, h)


def dropout_masks(model, batch, rng):
    def mask(rate, width):
        if rate == 0.0:
            return None
        return (rng.random((batch, width)) >= rate) / (1.0 - rate)
    mx = mask(model.input_dropout, model.embed_dim)
    mh = mask(model.recurrent_dropout, model.units)
    if mx is None and mh is None:
        return None
    if mx is None:
        mx = np.ones((batch, model.embed_dim))
    if mh is None:
        mh = np.ones((batch, model.units))
    return mx, mh


def forward(model, enc, training=False, rng=None):
    """Raw (unclamped) prediction for one sequence or a batch."""
    seqs = _as_batch(model, enc)
    masks = None
    if training:
        rng = rng if rng is not None else np.random.default_rng(model.seed)
        masks = dropout_masks(model, len(seqs), rng)
    y, _ = _forward(model, seqs, masks)
    return float(y[0]) if np.ndim(enc) == 1 else y


def predict(model, enc):
    """Inference output clamped to the hardness range [0, 1]."""
    return np.clip(forward(model, enc), 0.0, 1.0)


def _backward(model, cache, dy):
    p = model.params
    seqs, masks, steps, h_last = cache
    keep_x, keep_h = masks if masks is not None else (None, None)
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    grads["w_out"] = h_last.T @ dy
    grads["b_out"] = np.array([dy.sum()])
    dh = np.outer(dy, p["w_out"])
    dc = np.zeros_like(dh)
    for t in range(len(steps) - 1, -1, -1):
        st = steps[t]
        if st is None:
            continue
        m, x, hd, i, f, g, o, c_prev, tc = st
        mm = m[:, None]
        dh_new = np.where(mm, dh, 0.0)
        dc_new = np.where(mm, dc, 0.0)
        do = dh_new * tc
        dct = dc_new + dh_new * o * (1.0 - tc * tc)
        dz = np.concatenate([dct * g * i * (1.0 - i),
                             dct * c_prev * f * (1.0 - f),
                             dct * i * (1.0 - g * g),
                             do * o * (1.0 - o)], axis=1)
        grads["W"] += x.T @ dz
        grads["U"] += hd.T @ dz
        grads["b"] += dz.sum(axis=0)
        dx = dz @ p["W"].T
        if keep_x is not None:
            dx = dx * keep_x
        np.add.at(grads["embedding"], seqs[:, t], dx)
        dhd = dz @ p["U"].T
        if keep_h is not None:
            dhd = dhd * keep_h
        dh = np.where(mm, dhd, dh)
        dc = np.where(mm, dct * f, dc)
    return grads


def loss_and_grads(model, seqs, targets, masks=None):
    """Mean absolute error of a batch and its parameter gradients."""
    seqs = _as_batch(model, seqs)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if len(targets) != len(seqs):
        raise DimensionMismatch("targets and sequences differ in length")
    y, cache = _forward(model, seqs, masks)
    r = y - targets
    loss = float(np.mean(np.abs(r)))
    dy = np.sign(r) / len(r)
    return loss, _backward(model, cache, dy)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    validation_fraction: float = 0.3
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise HyperparameterError("validation_fraction must lie in (0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise HyperparameterError("epochs >= 0 and batch_size >= 1 needed")
        if self.learning_rate < 0:
            raise HyperparameterError("learning_rate must be >= 0")


def validation_split(n, fraction):
    """Sizes (train, validation); the first rows train, the tail validates."""
    n_train = int(n * (1.0 - fraction))
    return n_train, n - n_train


class Adamax:
    def __init__(self, params, lr=0.002, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.u = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        lr_t = self.lr / (1.0 - self.beta1 ** self.t)
        for k in params:
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.u[k] = np.maximum(self.beta2 * self.u[k], np.abs(g))
            params[k] -= lr_t * self.m[k] / (self.u[k] + self.eps)


@dataclass
class History:
    rows: list = field(default_factory=list)

    def add(self, epoch, train_mae, val_mae):
        self.rows.append((epoch, train_mae, val_mae))

    @property
    def train_mae(self):
        return [r[1] for r in self.rows]

    @property
    def val_mae(self):
        return [r[2] for r in self.rows]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_mae", "val_mae"])
            for e, tr, va in self.rows:
                w.writerow([e, repr(tr), repr(va)])


def _mae(model, seqs, y):
    if len(seqs) == 0:
        return float("nan")
    return float(np.mean(np.abs(forward(model, seqs) - y)))


def train(model, seqs, targets, cfg=TrainConfig(), on_epoch=None):
    """Fit in place with Adamax on MAE; returns (model, History).

    Reported per-epoch MAE values are measured in inference mode after
    the epoch's updates.
    """
    seqs = _as_batch(model, seqs) if len(seqs) else np.zeros((0, 0), int)
    y = np.asarray(targets, dtype=np.float64).ravel()
    if len(seqs) == 0:
        raise TrainingError("empty training set")
    if len(y) != len(seqs):
        raise DimensionMismatch("targets and sequences differ in length")
    n_train, _ = validation_split(len(y), cfg.validation_fraction)
    if n_train == 0:
        raise TrainingError("validation split leaves no training rows")
    Xt, yt = seqs[:n_train], y[:n_train]
    Xv, yv = seqs[n_train:], y[n_train:]
    rng = np.random.default_rng(cfg.seed)
    opt = Adamax(model.params, cfg.learning_rate, cfg.beta1, cfg.beta2,
                 cfg.epsilon)
    hist = History()
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n_train) if cfg.shuffle else np.arange(n_train)
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            masks = dropout_masks(model, len(idx), rng)
            loss, grads = loss_and_grads(model, Xt[idx], yt[idx], masks)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch "
                                    f"starting at {start}")
            opt.step(model.params, grads)
        tr, va = _mae(model, Xt, yt), _mae(model, Xv, yv)
        if not math.isfinite(tr):
            raise TrainingError(f"non-finite training MAE after epoch {epoch}")
        hist.add(epoch, tr, va)
        if on_epoch is not None:
            on_epoch(epoch, tr, va)
    return model, hist


def _coordinate_sample(model, seqs, n_coords, rng):
    H = model.units
    groups = []
    used_rows = np.unique(seqs[seqs != 0])
    groups.append(("embedding", [("embedding", r, j) for r in used_rows
                                 for j in range(model.embed_dim)]))
    for name in ("W", "U", "b"):
        shape = model.params[name].shape
        for k, gate in enumerate(GATES):
            cols = range(k * H, (k + 1) * H)
            if name == "b":
                coords = [(j,) for j in cols]
            else:
                coords = [(r, j) for r in range(shape[0]) for j in cols]
            groups.append((f"{name}_{gate}", [(name,) + c for c in coords]))
    groups.append(("w_out", [("w_out", j) for j in range(H)]))
    groups.append(("b_out", [("b_out", 0)]))
    per_group = max(1, math.ceil(n_coords / len(groups)))
    chosen = []
    for _, coords in groups:
        k = min(len(coords), per_group)
        for j in rng.choice(len(coords), size=k, replace=False):
            chosen.append(coords[j])
    return chosen


def gradient_check(model, sample, epsilon=1e-5, n_coords=200, seed=0,
                   grad_fn=None, floor=1e-6):
    """Max relative error between analytic and central-difference gradients.

    ``sample`` is ``(sequences, targets)``.  Targets are pushed one unit
    away from the current output so the absolute value stays on one side
    of its kink.  ``grad_fn(model, seqs, targets)`` may replace the
    analytic gradient, which is how a corrupted gradient is tested.
    Differences of an O(1) loss carry roughly 1e-11 of rounding noise, so
    gradients below ``floor`` are compared on the absolute scale.
    """
    if not epsilon > 0:
        raise HyperparameterError("epsilon must be positive")
    seqs, targets = sample
    seqs = _as_batch(model, seqs)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    out = np.atleast_1d(forward(model, seqs))
    targets = np.where(targets >= out, out + 1.0, out - 1.0)
    grad_fn = grad_fn or (lambda m, s, t: loss_and_grads(m, s, t)[1])
    grads = grad_fn(model, seqs, targets)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, *idx in _coordinate_sample(model, seqs, n_coords, rng):
        idx = tuple(idx)
        arr = model.params[name]
        orig = arr[idx]
        arr[idx] = orig + epsilon
        lp = loss_and_grads(model, seqs, targets)[0]
        arr[idx] = orig - epsilon
        lm = loss_and_grads(model, seqs, targets)[0]
        arr[idx] = orig
        num = (lp - lm) / (2.0 * epsilon)
        ana = grads[name][idx]
        err = abs(ana - num) / max(abs(ana), abs(num), floor)
        worst = max(worst, err)
    return worst


def dumps_model(model):
    model.check()
    meta = {
        "version": FORMAT_VERSION,
        "input_dropout": model.input_dropout,
        "recurrent_dropout": model.recurrent_dropout,
        "seed": model.seed,
        "vocab": None if model.vocab is None else model.vocab.tokens,
        "arrays": [[k, list(model.params[k].shape)] for k in PARAM_NAMES],
    }
    head = json.dumps(meta, sort_keys=True).encode("utf-8")
    body = b"".join(np.ascontiguousarray(model.params[k], dtype="<f8").tobytes()
                    for k in PARAM_NAMES)
    return MAGIC + b"\n" + struct.pack("<Q", len(head)) + head + body


def loads_model(blob):
    if not blob.startswith(MAGIC + b"\n"):
        raise ModelFormatError("not an LSTM model file")
    pos = len(MAGIC) + 1
    try:
        (n,) = struct.unpack_from("<Q", blob, pos)
        meta = json.loads(blob[pos + 8:pos + 8 + n].decode("utf-8"))
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable model header: {exc}") from None
    if meta.get("version") != FORMAT_VERSION:
        raise ModelVersionError(f"LSTM model version {meta.get('version')}, "
                                f"expected {FORMAT_VERSION}")
    pos += 8 + n
    params = {}
    try:
        for name, shape in meta["arrays"]:
            count = int(np.prod(shape))
            raw = blob[pos:pos + 8 * count]
            if len(raw) != 8 * count:
                raise ModelFormatError("model file is truncated")
            params[name] = np.frombuffer(raw, dtype="<f8").astype(
                np.float64).reshape(shape)
            pos += 8 * count
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad array table: {exc}") from None
    if pos != len(blob) or set(params) != set(PARAM_NAMES):
        raise ModelFormatError("model file has unexpected content")
    vocab = None if meta["vocab"] is None else Vocabulary(meta["vocab"])
    model = LstmModel(params, meta["input_dropout"],
                      meta["recurrent_dropout"], meta["seed"], vocab)
    try:
        model.check()
    except (DimensionMismatch, TrainingError) as exc:
        raise ModelFormatError(str(exc)) from None
    return model


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path, "rb") as fh:
        return loads_model(fh.read())
