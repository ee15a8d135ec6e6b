"""Boundary-feature encoder and span scorers, with exact gradients.

A document is embedded, run through two stacked bidirectional LSTM layers,
and every boundary position p in 0..n is represented by concatenating the
forward state at p and the backward state at p from both layers.  Three
feed-forward heads score the actions: shift from the top span's two
boundary vectors, combine from three (the boundary below the top span plus
the top span), and labeling from the span's two boundaries and its retained
midpoint, with one output per label chain plus a no-label slot.

Everything is float64 numpy with hand-written backpropagation, so gradient
correctness is checkable against central finite differences.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .trees import labeled_spans

UNK = "<unk>"
CHECKPOINT_VERSION = 1


class ModelError(ValueError):
    pass


@dataclass
class ModelConfig:
    word_dim: int = 50
    hidden_dim: int = 200     # per direction, per layer
    scorer_hidden: int = 200

    @property
    def boundary_dim(self):
        return 4 * self.hidden_dim  # 2 layers x 2 directions

    def to_dict(self):
        return {
            "word_dim": self.word_dim,
            "hidden_dim": self.hidden_dim,
            "scorer_hidden": self.scorer_hidden,
        }


class Vocabulary:
    """Token and label-chain inventories built from a training treebank."""

    def __init__(self, words, counts, chains):
        if not words or words[0] != UNK:
            raise ModelError("word list must start with the unknown-word slot")
        self.words = list(words)
        self.counts = dict(counts)
        self.chains = list(chains)
        self._word_ids = {w: i for i, w in enumerate(self.words)}
        self._chain_ids = {c: i + 1 for i, c in enumerate(self.chains)}

    @classmethod
    def from_treebank(cls, trees):
        counts = {}
        chains = set()
        for tree in trees:
            for token in tree.tokens:
                counts[token.text] = counts.get(token.text, 0) + 1
            chains.update(span.chain for span in labeled_spans(tree))
        return cls([UNK] + sorted(counts), counts, sorted(chains))

    @property
    def n_words(self):
        return len(self.words)

    @property
    def label_dim(self):
        return len(self.chains) + 1  # slot 0 is no-label

    def token_id(self, text):
        return self._word_ids.get(text, 0)

    def chain_id(self, chain):
        try:
            return self._chain_ids[chain]
        except KeyError:
            raise ModelError(f"label chain {chain!r} not in the inventory") from None

    def inventory(self):
        return [None] + self.chains

    def is_singleton(self, text):
        return self.counts.get(text, 0) == 1

    def to_dict(self):
        return {"words": self.words, "counts": self.counts, "chains": self.chains}

    @classmethod
    def from_dict(cls, data):
        return cls(data["words"], data["counts"], data["chains"])


# ---------------------------------------------------------------------------
# parameters


def _glorot(rng, rows, cols):
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_parameters(vocab, config, rng) -> dict:
    """Fresh float64 parameters for the given vocabulary and dimensions."""
    H, dw, hs = config.hidden_dim, config.word_dim, config.scorer_hidden
    D = config.boundary_dim
    params = {"embed": rng.uniform(-0.1, 0.1, size=(vocab.n_words, dw))}
    for name, in_dim in (
        ("lstm1f", dw),
        ("lstm1b", dw),
        ("lstm2f", 2 * H),
        ("lstm2b", 2 * H),
    ):
        params[f"{name}.Wx"] = _glorot(rng, 4 * H, in_dim)
        params[f"{name}.Wh"] = _glorot(rng, 4 * H, H)
        bias = np.zeros(4 * H)
        bias[H : 2 * H] = 1.0  # forget-gate bias keeps early memory open
        params[f"{name}.b"] = bias
    for head, width in (("shift", 2 * D), ("combine", 3 * D)):
        params[f"{head}.W1"] = _glorot(rng, hs, width)
        params[f"{head}.b1"] = np.zeros(hs)
        params[f"{head}.w2"] = _glorot(rng, 1, hs)[0]
        params[f"{head}.b2"] = np.zeros(1)
    params["label.W1"] = _glorot(rng, hs, 3 * D)
    params["label.b1"] = np.zeros(hs)
    params["label.W2"] = _glorot(rng, vocab.label_dim, hs)
    params["label.b2"] = np.zeros(vocab.label_dim)
    return {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}


def zero_gradients(params) -> dict:
    return {k: np.zeros_like(v) for k, v in params.items()}


# ---------------------------------------------------------------------------
# LSTM primitives


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class _LstmCache:
    xs: np.ndarray       # (n, in_dim)
    states: np.ndarray   # (n+1, H); states[t] = hidden after t inputs
    cells: np.ndarray    # (n+1, H)
    gates: list          # per step (i, f, o, g, tanh_c)


def _lstm_forward(Wx, Wh, b, xs) -> _LstmCache:
    n = xs.shape[0]
    H = Wh.shape[1]
    states = np.zeros((n + 1, H))
    cells = np.zeros((n + 1, H))
    gates = []
    for t in range(n):
        z = Wx @ xs[t] + Wh @ states[t] + b
        i = _sigmoid(z[:H])
        f = _sigmoid(z[H : 2 * H])
        o = _sigmoid(z[2 * H : 3 * H])
        g = np.tanh(z[3 * H :])
        c = f * cells[t] + i * g
        tc = np.tanh(c)
        states[t + 1] = o * tc
        cells[t + 1] = c
        gates.append((i, f, o, g, tc))
    return _LstmCache(xs, states, cells, gates)


def _lstm_backward(Wx, Wh, cache, d_states):
    """Backpropagate through the whole run.

    `d_states` holds the external gradient arriving at each hidden state
    (boundary reads plus next-layer inputs).  Returns the input gradients
    and the parameter gradients.
    """
    n = cache.xs.shape[0]
    H = Wh.shape[1]
    d_xs = np.zeros_like(cache.xs)
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H)
    dh = np.zeros(H)
    dc = np.zeros(H)
    for t in range(n - 1, -1, -1):
        dh = dh + d_states[t + 1]
        i, f, o, g, tc = cache.gates[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * cache.cells[t]
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * (1.0 - g * g),
            ]
        )
        dWx += np.outer(dz, cache.xs[t])
        dWh += np.outer(dz, cache.states[t])
        db += dz
        d_xs[t] = Wx.T @ dz
        dh = Wh.T @ dz
        dc = dc * f
    return d_xs, dWx, dWh, db


# ---------------------------------------------------------------------------
# encoding


@dataclass
class DropoutMasks:
    layer1: np.ndarray    # (n, 2H) on the first layer's per-token outputs
    features: np.ndarray  # (n+1, 4H) on the boundary features


def make_dropout_masks(n, config, rate, rng) -> DropoutMasks | None:
    """Inverted-dropout masks at the recurrent-output sites (one draw per
    document pass); scorer-hidden masks are drawn per step by the trainer."""
    if rate <= 0.0:
        return None
    keep = 1.0 - rate
    H, D = config.hidden_dim, config.boundary_dim
    return DropoutMasks(
        layer1=(rng.random((n, 2 * H)) < keep) / keep,
        features=(rng.random((n + 1, D)) < keep) / keep,
    )


def sample_hidden_mask(config, rate, rng):
    if rate <= 0.0:
        return None
    keep = 1.0 - rate
    return (rng.random(config.scorer_hidden) < keep) / keep


@dataclass
class Encoding:
    ids: np.ndarray
    boundary: np.ndarray          # (n+1, 4H) after feature dropout
    caches: dict = field(repr=False, default_factory=dict)
    masks: DropoutMasks | None = None

    @property
    def n(self):
        return len(self.ids)

    def feature(self, p):
        if p < 0:
            return np.zeros(self.boundary.shape[1])
        return self.boundary[p]


def encode(params, ids, masks: DropoutMasks | None = None) -> Encoding:
    """Boundary features for one document (n >= 1 token ids)."""
    ids = np.asarray(ids, dtype=int)
    n = len(ids)
    if n == 0:
        raise ModelError("cannot encode an empty document")
    E = params["embed"][ids]
    c1f = _lstm_forward(params["lstm1f.Wx"], params["lstm1f.Wh"], params["lstm1f.b"], E)
    c1b = _lstm_forward(
        params["lstm1b.Wx"], params["lstm1b.Wh"], params["lstm1b.b"], E[::-1]
    )
    out1 = np.concatenate([c1f.states[1:], c1b.states[1:][::-1]], axis=1)
    out1d = out1 * masks.layer1 if masks is not None else out1
    c2f = _lstm_forward(
        params["lstm2f.Wx"], params["lstm2f.Wh"], params["lstm2f.b"], out1d
    )
    c2b = _lstm_forward(
        params["lstm2b.Wx"], params["lstm2b.Wh"], params["lstm2b.b"], out1d[::-1]
    )
    F = np.concatenate(
        [c1f.states, c1b.states[::-1], c2f.states, c2b.states[::-1]], axis=1
    )
    Fd = F * masks.features if masks is not None else F
    caches = {"l1f": c1f, "l1b": c1b, "l2f": c2f, "l2b": c2b}
    return Encoding(ids=ids, boundary=Fd, caches=caches, masks=masks)


def _encoder_backward(params, enc: Encoding, dF_out) -> dict:
    """Push boundary-feature gradients back to every encoder parameter."""
    H = params["lstm1f.Wh"].shape[1]
    grads = {}
    dF = dF_out * enc.masks.features if enc.masks is not None else dF_out

    d2f = dF[:, 2 * H : 3 * H].copy()
    d2b = dF[:, 3 * H : 4 * H][::-1].copy()
    d_out1d_f, grads["lstm2f.Wx"], grads["lstm2f.Wh"], grads["lstm2f.b"] = (
        _lstm_backward(params["lstm2f.Wx"], params["lstm2f.Wh"], enc.caches["l2f"], d2f)
    )
    d_out1d_b, grads["lstm2b.Wx"], grads["lstm2b.Wh"], grads["lstm2b.b"] = (
        _lstm_backward(params["lstm2b.Wx"], params["lstm2b.Wh"], enc.caches["l2b"], d2b)
    )
    d_out1d = d_out1d_f + d_out1d_b[::-1]
    d_out1 = d_out1d * enc.masks.layer1 if enc.masks is not None else d_out1d

    d1f = dF[:, 0:H].copy()
    d1f[1:] += d_out1[:, :H]
    d1b = dF[:, H : 2 * H][::-1].copy()
    d1b[1:] += d_out1[::-1, H:]
    dE_f, grads["lstm1f.Wx"], grads["lstm1f.Wh"], grads["lstm1f.b"] = _lstm_backward(
        params["lstm1f.Wx"], params["lstm1f.Wh"], enc.caches["l1f"], d1f
    )
    dE_b, grads["lstm1b.Wx"], grads["lstm1b.Wh"], grads["lstm1b.b"] = _lstm_backward(
        params["lstm1b.Wx"], params["lstm1b.Wh"], enc.caches["l1b"], d1b
    )
    dE = dE_f + dE_b[::-1]
    grads["embed"] = np.zeros_like(params["embed"])
    np.add.at(grads["embed"], enc.ids, dE)
    return grads


# ---------------------------------------------------------------------------
# scoring heads


def _head_forward(params, head, x, hmask):
    pre = params[f"{head}.W1"] @ x + params[f"{head}.b1"]
    hidden = np.maximum(pre, 0.0)
    if hmask is not None:
        hidden = hidden * hmask
    return pre, hidden


def _scalar_score(params, head, x, hmask):
    pre, hidden = _head_forward(params, head, x, hmask)
    score = params[f"{head}.w2"] @ hidden + params[f"{head}.b2"][0]
    return score, (x, pre, hidden)


def _scalar_backward(params, grads, head, cache, dscore, hmask):
    x, pre, hidden = cache
    grads[f"{head}.w2"] += dscore * hidden
    grads[f"{head}.b2"][0] += dscore
    dh = dscore * params[f"{head}.w2"]
    if hmask is not None:
        dh = dh * hmask
    dpre = dh * (pre > 0)
    grads[f"{head}.W1"] += np.outer(dpre, x)
    grads[f"{head}.b1"] += dpre
    return params[f"{head}.W1"].T @ dpre


def _label_score(params, x, hmask):
    pre, hidden = _head_forward(params, "label", x, hmask)
    scores = params["label.W2"] @ hidden + params["label.b2"]
    return scores, (x, pre, hidden)


def _label_backward(params, grads, cache, dscores, hmask):
    x, pre, hidden = cache
    grads["label.W2"] += np.outer(dscores, hidden)
    grads["label.b2"] += dscores
    dh = params["label.W2"].T @ dscores
    if hmask is not None:
        dh = dh * hmask
    dpre = dh * (pre > 0)
    grads["label.W1"] += np.outer(dpre, x)
    grads["label.b1"] += dpre
    return params["label.W1"].T @ dpre


def _gather(enc, positions):
    return np.concatenate([enc.feature(p) for p in positions])


def _scatter(dF, positions, dx, width):
    for k, p in enumerate(positions):
        if p >= 0:
            dF[p] += dx[k * width : (k + 1) * width]


# ---------------------------------------------------------------------------
# step targets and the loss


@dataclass
class StructuralStep:
    below: int           # left boundary of the span under the top one, or -1
    left: int
    right: int
    can_shift: bool
    can_combine: bool
    target: int          # 0 = shift, 1 = combine
    hmask_shift: np.ndarray | None = None
    hmask_combine: np.ndarray | None = None


@dataclass
class LabelStep:
    left: int
    mid: int
    right: int
    mask_nolabel: bool                 # the full-document span must be labeled
    target: int                        # 0 = no-label, k = chain k
    allowed: np.ndarray | None = None  # optional bool mask over label slots
    hmask: np.ndarray | None = None


def structural_raw_scores(params, enc, step: StructuralStep):
    s_sh, cache_sh = _scalar_score(
        params, "shift", _gather(enc, (step.left, step.right)), step.hmask_shift
    )
    s_cb, cache_cb = _scalar_score(
        params,
        "combine",
        _gather(enc, (step.below, step.left, step.right)),
        step.hmask_combine,
    )
    return np.array([s_sh, s_cb]), (cache_sh, cache_cb)


def label_raw_scores(params, enc, step: LabelStep):
    x = _gather(enc, (step.left, step.mid, step.right))
    return _label_score(params, x, step.hmask)


def _masked_log_probs(scores, legal):
    masked = np.where(legal, scores, -np.inf)
    top = np.max(masked)
    if not np.isfinite(top):
        raise ModelError("no legal action to normalize over")
    logz = top + np.log(np.sum(np.exp(masked - top)))
    return masked - logz


def loss_and_gradients(params, ids, steps, masks: DropoutMasks | None = None):
    """Summed negative log-likelihood of the per-step targets, with exact
    gradients for every parameter.  Raises on a non-finite loss."""
    enc = encode(params, ids, masks)
    grads = zero_gradients(params)
    dF = np.zeros_like(enc.boundary)
    loss = 0.0
    label_dim = params["label.b2"].shape[0]

    for index, step in enumerate(steps):
        try:
            loss = _step_loss(params, enc, grads, dF, loss, label_dim, step)
        except ModelError as err:
            raise ModelError(f"step {index} ({step!r}): {err}") from None
        if not np.isfinite(loss):
            raise ModelError(f"non-finite loss at step {index}: {step!r}")

    enc_grads = _encoder_backward(params, enc, dF)
    for key, value in enc_grads.items():
        grads[key] += value
    return float(loss), grads


def _step_loss(params, enc, grads, dF, loss, label_dim, step):
    if isinstance(step, StructuralStep):
        scores, caches = structural_raw_scores(params, enc, step)
        legal = np.array([step.can_shift, step.can_combine])
        logp = _masked_log_probs(scores, legal)
        loss -= logp[step.target]
        dscores = np.where(legal, np.exp(logp), 0.0)
        dscores[step.target] -= 1.0
        if dscores[0] != 0.0:
            dx = _scalar_backward(
                params, grads, "shift", caches[0], dscores[0], step.hmask_shift
            )
            _scatter(dF, (step.left, step.right), dx, enc.boundary.shape[1])
        if dscores[1] != 0.0:
            dx = _scalar_backward(
                params, grads, "combine", caches[1], dscores[1], step.hmask_combine
            )
            _scatter(
                dF, (step.below, step.left, step.right), dx, enc.boundary.shape[1]
            )
    else:
        scores, cache = label_raw_scores(params, enc, step)
        legal = (
            step.allowed.copy()
            if step.allowed is not None
            else np.ones(label_dim, dtype=bool)
        )
        if step.mask_nolabel:
            legal[0] = False
        logp = _masked_log_probs(scores, legal)
        loss -= logp[step.target]
        dscores = np.where(legal, np.exp(logp), 0.0)
        dscores[step.target] -= 1.0
        dx = _label_backward(params, grads, cache, dscores, step.hmask)
        _scatter(dF, (step.left, step.mid, step.right), dx, enc.boundary.shape[1])
    return loss


# ---------------------------------------------------------------------------
# spec-shaped scoring surfaces


def score_structural(params, enc, state):
    """Masked log-probabilities over (shift, combine) for a structural state."""
    from .transition import COMBINE_ACTION, SHIFT_ACTION, legal_actions

    legal = legal_actions(state)
    below = state.boundaries[-3] if len(state.boundaries) >= 4 else -1
    left, right = state.top
    step = StructuralStep(
        below=below,
        left=left,
        right=right,
        can_shift=SHIFT_ACTION in legal,
        can_combine=COMBINE_ACTION in legal,
        target=0,
    )
    scores, _ = structural_raw_scores(params, enc, step)
    return _masked_log_probs(scores, np.array([step.can_shift, step.can_combine]))


def score_labels(params, enc, state):
    """Masked log-probabilities over (no-label, chain 1..K) for a label state."""
    left, right = state.top
    step = LabelStep(
        left=left,
        mid=state.midpoint,
        right=right,
        mask_nolabel=(left, right) == (0, enc.n),
        target=0,
    )
    scores, _ = label_raw_scores(params, enc, step)
    legal = np.ones(params["label.b2"].shape[0], dtype=bool)
    if step.mask_nolabel:
        legal[0] = False
    return _masked_log_probs(scores, legal)


class SpanScorer:
    """Inference-time scorer bound to one parameter set; feed to parse_greedy."""

    def __init__(self, params, vocab):
        self.params = params
        self.vocab = vocab
        self.enc = None

    def prepare(self, words):
        ids = [self.vocab.token_id(w) for w in words]
        self.enc = encode(self.params, ids)

    def structural(self, below, left, right):
        step = StructuralStep(
            below=below, left=left, right=right,
            can_shift=True, can_combine=True, target=0,
        )
        scores, _ = structural_raw_scores(self.params, self.enc, step)
        return scores

    def labels(self, left, mid, right):
        step = LabelStep(left=left, mid=mid, right=right, mask_nolabel=False, target=0)
        scores, _ = label_raw_scores(self.params, self.enc, step)
        return scores

    def inventory(self):
        return self.vocab.inventory()


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, params, vocab, config) -> None:
    meta = json.dumps(
        {
            "version": CHECKPOINT_VERSION,
            "config": config.to_dict(),
            "vocabulary": vocab.to_dict(),
        }
    )
    arrays = dict(params)
    arrays["__meta__"] = np.array(meta)
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)


def load_checkpoint(path):
    """Returns (params, vocab, config); validates shape consistency."""
    with np.load(path, allow_pickle=False) as data:
        if "__meta__" not in data:
            raise ModelError(f"{path}: not a checkpoint (missing metadata)")
        meta = json.loads(str(data["__meta__"]))
        params = {k: data[k] for k in data.files if k != "__meta__"}
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ModelError(f"unsupported checkpoint version {meta.get('version')!r}")
    config = ModelConfig(**meta["config"])
    vocab = Vocabulary.from_dict(meta["vocabulary"])
    rng = np.random.default_rng(0)
    expected = init_parameters(vocab, config, rng)
    if set(expected) != set(params):
        missing = sorted(set(expected) ^ set(params))
        raise ModelError(f"checkpoint parameter names do not match: {missing}")
    for key, array in expected.items():
        if params[key].shape != array.shape:
            raise ModelError(
                f"checkpoint {key} has shape {params[key].shape}, "
                f"expected {array.shape}"
            )
    params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
    return params, vocab, config
