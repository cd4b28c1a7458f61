"""Latent-sort autoencoder: an MLP encoder mapping tokens to a scalar and a
decoder mapping back, trained with reconstruction loss plus a latent gradient
penalty (LGP) that makes neighboring latent gaps track original-space
distances. Forward and backward passes are written out explicitly so the
gradients can be validated against finite differences.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import SortedSequence, TokenSet

MODEL_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# MLP with tanh hidden layers and a linear output layer.
# ---------------------------------------------------------------------------


@dataclass
class Mlp:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[l]: (in, out)
    biases: list[np.ndarray]  # biases[l]: (out,)

    @classmethod
    def init(cls, layer_sizes: list[int], rng: np.random.Generator) -> "Mlp":
        """Uniform init scaled by 1/sqrt(fan_in) per layer (small variance)."""
        weights, biases = [], []
        for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / math.sqrt(n_in)
            weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            biases.append(rng.uniform(-bound, bound, size=n_out))
        return cls(list(layer_sizes), weights, biases)

    def validate(self) -> None:
        n_layers = len(self.layer_sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ValueError("weight/bias count does not match layer_sizes")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_sizes[l], self.layer_sizes[l + 1])
            if w.shape != expect or b.shape != (expect[1],):
                raise ValueError(f"layer {l}: shapes {w.shape}/{b.shape} disagree with layer_sizes {expect}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")

    def forward(self, x: np.ndarray):
        """Batched forward pass. x: (B, in). Returns output (B, out) and the
        per-layer activations needed for backprop."""
        acts = [x]
        a = x
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if l == last else np.tanh(z)
            acts.append(a)
        return a, acts

    def backward(self, acts, grad_out: np.ndarray):
        """Backprop grad_out (B, out) through the cached forward pass.
        Returns (grad_x, grad_weights, grad_biases)."""
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        delta = grad_out
        for l in range(len(self.weights) - 1, -1, -1):
            if l != len(self.weights) - 1:
                delta = delta * (1.0 - acts[l + 1] ** 2)  # tanh'
            gw[l] = acts[l].T @ delta
            gb[l] = delta.sum(axis=0)
            delta = delta @ self.weights[l].T
        return delta, gw, gb

    def params(self) -> list[np.ndarray]:
        return self.weights + self.biases


@dataclass
class LatentSortModel:
    encoder: Mlp  # N -> 1
    decoder: Mlp  # 1 -> N
    token_dim: int
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        self.encoder.validate()
        self.decoder.validate()
        n = self.token_dim
        if self.encoder.layer_sizes[0] != n or self.encoder.layer_sizes[-1] != 1:
            raise ValueError("encoder must map token_dim -> 1")
        if self.decoder.layer_sizes[0] != 1 or self.decoder.layer_sizes[-1] != n:
            raise ValueError("decoder must map 1 -> token_dim")

    def params(self) -> list[np.ndarray]:
        return self.encoder.params() + self.decoder.params()


def init_model(n: int, hidden_sizes=(64, 64), seed: int = 0) -> LatentSortModel:
    """Deterministic model initialization for token dimension n."""
    if n < 1 or any(h < 1 for h in hidden_sizes):
        raise ValueError("token dimension and hidden sizes must be positive")
    rng = np.random.default_rng(seed)
    hidden = list(hidden_sizes)
    encoder = Mlp.init([n] + hidden + [1], rng)
    decoder = Mlp.init([1] + hidden + [n], rng)
    return LatentSortModel(encoder, decoder, n, meta={"seed": seed, "epochs": 0})


def encode_batch(m: LatentSortModel, x: np.ndarray) -> np.ndarray:
    if x.shape[1] != m.token_dim:
        raise ValueError(f"token dimension {x.shape[1]} != model dimension {m.token_dim}")
    h, _ = m.encoder.forward(x)
    return h[:, 0]


def encode(m: LatentSortModel, token) -> float:
    return float(encode_batch(m, np.atleast_2d(np.asarray(token, dtype=np.float64)))[0])


def decode_batch(m: LatentSortModel, h: np.ndarray) -> np.ndarray:
    out, _ = m.decoder.forward(np.asarray(h, dtype=np.float64).reshape(-1, 1))
    return out


def decode(m: LatentSortModel, h: float) -> np.ndarray:
    return decode_batch(m, np.array([h]))[0]


def latent_sort(m: LatentSortModel, x: TokenSet) -> SortedSequence:
    """Sort tokens ascending by encoder latents (stable).

    Reported keys are min-max normalized to [0, 1] over the set; raw encoder
    outputs are kept in `raw_keys`. Normalization is monotone, so it cannot
    change the order. A singleton set gets normalized key 0.
    """
    raw = encode_batch(m, x.values)
    order = np.argsort(raw, kind="stable")
    sorted_raw = raw[order]
    span = sorted_raw[-1] - sorted_raw[0]
    if span > 0:
        norm = (sorted_raw - sorted_raw[0]) / span
    else:
        norm = np.zeros_like(sorted_raw)
    return SortedSequence(x.values[order], keys=norm, raw_keys=sorted_raw)


# ---------------------------------------------------------------------------
# Losses.
# ---------------------------------------------------------------------------


def reconstruction_loss(x: np.ndarray, x_hat: np.ndarray, kind: str = "l2"):
    """Mean elementwise reconstruction loss and its gradient w.r.t. x_hat."""
    diff = x_hat - x
    scale = 1.0 / diff.size
    if kind == "l2":
        return float(np.sum(diff * diff) * scale), 2.0 * diff * scale
    if kind == "l1":
        return float(np.sum(np.abs(diff)) * scale), np.sign(diff) * scale
    raise ValueError(f"unknown reconstruction loss kind {kind!r}")


def _lgp_pairs(m: int, literal_endpoints: bool) -> range:
    """Consecutive-pair indices included in the penalty.

    The literal variant drops the first and last neighbor pairs (the double
    sum's indices run over interior positions only); the default includes
    every consecutive pair.
    """
    if literal_endpoints:
        return range(1, m - 2)
    return range(0, m - 1)


def lgp_terms(x_sorted: np.ndarray, h_sorted: np.ndarray, alpha: float, beta: float,
              literal_endpoints: bool = False):
    """Loss and gradient w.r.t. the sorted latents.

    For each included consecutive pair, g = ||x_i - x_{i+1}|| / (|h_i - h_{i+1}| + beta) - alpha.
    Each unordered pair appears twice in the symmetric double sum, so the
    returned loss is sum(2 * g^2).
    """
    m = x_sorted.shape[0]
    grad_h = np.zeros(m)
    loss = 0.0
    for i in _lgp_pairs(m, literal_endpoints):
        d = float(np.linalg.norm(x_sorted[i] - x_sorted[i + 1]))
        s = float(abs(h_sorted[i] - h_sorted[i + 1]))
        denom = s + beta
        g = d / denom - alpha
        loss += 2.0 * g * g
        # d(2 g^2)/ds, chained through s = |h_i - h_{i+1}|
        dl_ds = -4.0 * g * d / (denom * denom)
        sign = 1.0 if h_sorted[i] >= h_sorted[i + 1] else -1.0
        grad_h[i] += dl_ds * sign
        grad_h[i + 1] -= dl_ds * sign
    return loss, grad_h


def lgp_loss(x_sorted: SortedSequence, alpha: float = 1.0, beta: float = 1e-6,
             literal_endpoints: bool = False) -> float:
    """Latent gradient penalty of a sequence already sorted by its keys."""
    if x_sorted.size < 2:
        return 0.0
    keys = x_sorted.raw_keys if x_sorted.raw_keys is not None else x_sorted.keys
    if keys is None:
        raise ValueError("lgp_loss requires a sequence with keys")
    loss, _ = lgp_terms(x_sorted.rows, keys, alpha, beta, literal_endpoints)
    return loss


# ---------------------------------------------------------------------------
# Training.
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 64
    peak_lr: float = 1e-3
    warmup_frac: float = 0.10
    warmup_init_lr: float = 1e-5
    final_lr: float = 1e-8
    lgp_coefficient: float = 0.05
    alpha: float = 1.0
    beta: float = 1e-6
    recon_kind: str = "l2"  # "l2" | "l1"
    weight_decay: float = 0.0
    seed: int = 0
    hidden_sizes: tuple = (64, 64)
    lgp_literal_endpoints: bool = False

    def validate(self) -> None:
        if self.lgp_coefficient < 0 or self.alpha <= 0 or self.beta <= 0:
            raise ValueError("require lgp_coefficient >= 0, alpha > 0, beta > 0")
        if not (0 <= self.warmup_frac < 1):
            raise ValueError("warmup_frac must be in [0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")


def learning_rate(step: int, total_steps: int, cfg: TrainConfig) -> float:
    """Exponential warmup to the peak, then cosine decay to the final lr."""
    warmup_steps = int(cfg.warmup_frac * total_steps)
    if step < warmup_steps:
        t = (step + 1) / warmup_steps
        return cfg.warmup_init_lr * (cfg.peak_lr / cfg.warmup_init_lr) ** t
    remaining = max(total_steps - warmup_steps, 1)
    t = (step - warmup_steps) / remaining
    return cfg.final_lr + 0.5 * (cfg.peak_lr - cfg.final_lr) * (1.0 + math.cos(math.pi * t))


def batch_losses_and_grads(m: LatentSortModel, sets: list[np.ndarray], cfg: TrainConfig):
    """Reconstruction + LGP losses and analytic gradients for one batch.

    The LGP is applied per token set: each set's tokens are ranked by the
    current encoder latents and only consecutive pairs of that order are
    penalized. Returns (recon, lgp, grads aligned with model.params()).
    """
    x = np.concatenate(sets, axis=0)
    h_col, enc_acts = m.encoder.forward(x)
    x_hat, dec_acts = m.decoder.forward(h_col)

    recon, grad_xhat = reconstruction_loss(x, x_hat, cfg.recon_kind)
    grad_h_dec, dec_gw, dec_gb = m.decoder.backward(dec_acts, grad_xhat)

    h = h_col[:, 0]
    grad_h_lgp = np.zeros_like(h)
    lgp_total = 0.0
    offset = 0
    for s in sets:
        msize = s.shape[0]
        hs = h[offset : offset + msize]
        order = np.argsort(hs, kind="stable")
        loss, gh_sorted = lgp_terms(s[order], hs[order], cfg.alpha, cfg.beta,
                                    cfg.lgp_literal_endpoints)
        lgp_total += loss
        gh = np.zeros(msize)
        gh[order] = gh_sorted
        grad_h_lgp[offset : offset + msize] = gh
        offset += msize
    lgp_mean = lgp_total / len(sets)

    grad_h = grad_h_dec + (cfg.lgp_coefficient / len(sets)) * grad_h_lgp[:, None]
    _, enc_gw, enc_gb = m.encoder.backward(enc_acts, grad_h)

    grads = enc_gw + enc_gb + dec_gw + dec_gb
    return recon, lgp_mean, grads


def total_loss(m: LatentSortModel, sets: list[np.ndarray], cfg: TrainConfig) -> float:
    """Scalar objective matching batch_losses_and_grads (finite-difference oracle hook)."""
    x = np.concatenate(sets, axis=0)
    h_col, _ = m.encoder.forward(x)
    x_hat, _ = m.decoder.forward(h_col)
    recon, _ = reconstruction_loss(x, x_hat, cfg.recon_kind)
    h = h_col[:, 0]
    lgp_total = 0.0
    offset = 0
    for s in sets:
        msize = s.shape[0]
        hs = h[offset : offset + msize]
        order = np.argsort(hs, kind="stable")
        loss, _ = lgp_terms(s[order], hs[order], cfg.alpha, cfg.beta, cfg.lgp_literal_endpoints)
        lgp_total += loss
        offset += msize
    return recon + cfg.lgp_coefficient * lgp_total / len(sets)


class AdamState:
    def __init__(self, params: list[np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def update(self, params: list[np.ndarray], grads: list[np.ndarray], lr: float,
               weight_decay: float = 0.0) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, g, mm, vv in zip(params, grads, self.m, self.v):
            if weight_decay:
                g = g + weight_decay * p
            mm *= b1
            mm += (1 - b1) * g
            vv *= b2
            vv += (1 - b2) * g * g
            p -= lr * (mm / bc1) / (np.sqrt(vv / bc2) + self.eps)


def train(data: list[TokenSet], cfg: TrainConfig | None = None):
    """Train a latent-sort model on a corpus of token sets.

    Returns (model, history) where history has one entry per epoch:
    {"epoch", "recon", "lgp", "lr"}. Fully deterministic given cfg.seed.
    Aborts with a diagnostic if the loss turns non-finite.
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    dims = {ts.dim for ts in data}
    if len(dims) != 1:
        raise ValueError(f"all token sets must share one dimension, got {sorted(dims)}")
    n = dims.pop()
    model = init_model(n, cfg.hidden_sizes, seed=cfg.seed)
    arrays = [ts.values for ts in data]

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    steps_per_epoch = max(1, math.ceil(len(arrays) / cfg.batch_size))
    total_steps = cfg.epochs * steps_per_epoch
    adam = AdamState(model.params())
    history: list[dict] = []
    step = 0
    lr = 0.0
    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(arrays))
        recon_sum = lgp_sum = 0.0
        for b in range(steps_per_epoch):
            idx = perm[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            if idx.size == 0:
                continue
            batch = [arrays[i] for i in idx]
            recon, lgp, grads = batch_losses_and_grads(model, batch, cfg)
            if not (math.isfinite(recon) and math.isfinite(lgp)):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, last lr {lr:.3e} "
                    f"(recon={recon}, lgp={lgp})"
                )
            lr = learning_rate(step, total_steps, cfg)
            adam.update(model.params(), grads, lr, cfg.weight_decay)
            recon_sum += recon
            lgp_sum += lgp
            step += 1
        history.append(
            {
                "epoch": epoch,
                "recon": recon_sum / steps_per_epoch,
                "lgp": lgp_sum / steps_per_epoch,
                "lr": lr,
            }
        )
    model.meta.update(
        {
            "seed": cfg.seed,
            "epochs": cfg.epochs,
            "final_recon": history[-1]["recon"] if history else None,
            "final_lgp": history[-1]["lgp"] if history else None,
        }
    )
    return model, history


# ---------------------------------------------------------------------------
# Serialization: JSON with exact float round-trip.
# ---------------------------------------------------------------------------


def _mlp_to_obj(mlp: Mlp) -> dict:
    return {
        "layer_sizes": list(mlp.layer_sizes),
        "weights": [[float(x) for x in w.ravel()] for w in mlp.weights],
        "biases": [[float(x) for x in b] for b in mlp.biases],
    }


def _mlp_from_obj(obj: dict) -> Mlp:
    sizes = [int(s) for s in obj["layer_sizes"]]
    weights, biases = [], []
    for l, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        flat = np.asarray(obj["weights"][l], dtype=np.float64)
        if flat.size != n_in * n_out:
            raise ValueError(f"layer {l}: weight count {flat.size} disagrees with layer_sizes")
        weights.append(flat.reshape(n_in, n_out))
        b = np.asarray(obj["biases"][l], dtype=np.float64)
        if b.size != n_out:
            raise ValueError(f"layer {l}: bias count {b.size} disagrees with layer_sizes")
        biases.append(b)
    mlp = Mlp(sizes, weights, biases)
    mlp.validate()
    return mlp


def save_model(m: LatentSortModel, path) -> None:
    obj = {
        "version": MODEL_FORMAT_VERSION,
        "token_dim": m.token_dim,
        "encoder": _mlp_to_obj(m.encoder),
        "decoder": _mlp_to_obj(m.decoder),
        "meta": m.meta,
    }
    with open(path, "w") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_model(path) -> LatentSortModel:
    with open(path) as fh:
        obj = json.load(fh)
    if obj.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {obj.get('version')!r}")
    model = LatentSortModel(
        _mlp_from_obj(obj["encoder"]),
        _mlp_from_obj(obj["decoder"]),
        int(obj["token_dim"]),
        meta=obj.get("meta", {}),
    )
    model.validate()
    return model
