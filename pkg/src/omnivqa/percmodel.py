"""Patch-based perceptual quality model with HM-guided sampling and EM-weighted pooling.

Pipeline: downsample both sequences and keep every 45th frame, build error
maps, draw 112x112 patches with probability proportional to their
head-movement weight, score each patch with a :class:`LocalScorer`, pool
the patch scores with normalized eye-movement weights, and map the pooled
value through a small two-layer head.  Training minimizes squared error
plus a total-variation penalty on the scorer's sensitivity maps and an L2
penalty on all parameters.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .projection import sample_bilinear

log = logging.getLogger(__name__)

PATCH_SIZE = 112
PATCH_STRIDE = 56
TARGET_WIDTH = 960
FRAME_INTERVAL = 45
HEAD_WIDTH = 8


class ModelError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


# -- preprocessing ------------------------------------------------------------

def resize_plane(plane, width: int, height: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment and clamped borders."""
    plane = np.asarray(plane, dtype=float)
    h, w = plane.shape
    if (h, w) == (height, width):
        return plane.copy()
    xs = (np.arange(width) + 0.5) * (w / width)
    ys = (np.arange(height) + 0.5) * (h / height)
    yc, xc = np.meshgrid(ys, xs, indexing="ij")
    return sample_bilinear(plane, xc, yc)


@dataclass
class FramePair:
    index: int
    ref: np.ndarray
    imp: np.ndarray
    error: np.ndarray


def error_map(ref, imp) -> np.ndarray:
    """Normalized absolute error ``|Y - Y'| / 255``."""
    return np.abs(np.asarray(ref, dtype=float) - np.asarray(imp, dtype=float)) / 255.0


def preprocess(ref_frames: Sequence, imp_frames: Sequence, width: int = TARGET_WIDTH,
               interval: int = FRAME_INTERVAL) -> list[FramePair]:
    """Spatially and temporally downsample a sequence pair and attach error maps."""
    if len(ref_frames) != len(imp_frames):
        raise ModelError(f"frame counts differ: {len(ref_frames)} vs {len(imp_frames)}")
    if len(ref_frames) == 0:
        raise ModelError("empty sequence")
    out = []
    for idx in range(0, len(ref_frames), interval):
        ref = np.asarray(ref_frames[idx], dtype=float)
        imp = np.asarray(imp_frames[idx], dtype=float)
        if ref.shape != imp.shape:
            raise ModelError(f"frame {idx}: shapes differ {ref.shape} vs {imp.shape}")
        h, w = ref.shape
        height = max(1, int(round(h * width / w)))
        ref_s = resize_plane(ref, width, height)
        imp_s = resize_plane(imp, width, height)
        out.append(FramePair(idx, ref_s, imp_s, error_map(ref_s, imp_s)))
    return out


# -- patch sampling -----------------------------------------------------------

@dataclass
class Patch:
    pixels: np.ndarray
    error: np.ndarray
    frame_index: int
    top: int
    left: int
    hm_weight: float
    em_weight: float = 0.0


def _footprint_sums(plane, size: int, tops, lefts) -> np.ndarray:
    integral = np.zeros((plane.shape[0] + 1, plane.shape[1] + 1))
    integral[1:, 1:] = np.cumsum(np.cumsum(np.asarray(plane, dtype=float), axis=0), axis=1)
    t = np.asarray(tops)[:, None]
    l = np.asarray(lefts)[None, :]
    return integral[t + size, l + size] - integral[t, l + size] - integral[t + size, l] + integral[t, l]


def candidate_grid(height: int, width: int, size: int = PATCH_SIZE, stride: int = PATCH_STRIDE):
    if height < size or width < size:
        raise ModelError(f"frame {width}x{height} is smaller than the {size}x{size} patch")
    return np.arange(0, height - size + 1, stride), np.arange(0, width - size + 1, stride)


def weighted_draw(weights, n: int, rng) -> np.ndarray:
    """Sequential draws without replacement, each proportional to weight.

    Once the remaining weight is exhausted the rest is drawn uniformly
    (with a warning).
    """
    w = np.asarray(weights, dtype=float).copy()
    if n > len(w):
        raise ModelError(f"cannot draw {n} patches from {len(w)} candidates")
    available = np.ones(len(w), dtype=bool)
    chosen = []
    warned = False
    for _ in range(n):
        mass = w[available].sum()
        if mass > 0:
            p = np.where(available, w, 0.0) / mass
        else:
            if not warned:
                warnings.warn("patch weights exhausted; falling back to uniform sampling",
                              RuntimeWarning, stacklevel=3)
                warned = True
            p = available / available.sum()
        k = int(rng.choice(len(w), p=p))
        chosen.append(k)
        available[k] = False
    return np.array(chosen, dtype=int)


def sample_patches(frame, error, hm_map, n: int, seed=None, frame_index: int = 0,
                   size: int = PATCH_SIZE, stride: int = PATCH_STRIDE) -> list[Patch]:
    """Draw ``n`` patches with probability proportional to their summed HM weight.

    Candidates lie on a ``stride`` grid; draws are without replacement and
    reproducible for a fixed ``seed`` (an int or a numpy Generator).
    """
    frame = np.asarray(frame, dtype=float)
    error = np.asarray(error, dtype=float)
    hm_map = np.asarray(hm_map, dtype=float)
    if not frame.shape == error.shape == hm_map.shape:
        raise ModelError("frame, error map and HM map must share one shape")
    if n < 1:
        raise ModelError("patch count must be positive")
    tops, lefts = candidate_grid(*frame.shape, size, stride)
    sums = _footprint_sums(hm_map, size, tops, lefts).ravel()
    rng = np.random.default_rng(seed)
    picks = weighted_draw(sums, n, rng)
    patches = []
    for k in picks:
        t = int(tops[k // len(lefts)])
        l = int(lefts[k % len(lefts)])
        patches.append(Patch(frame[t:t + size, l:l + size].copy(),
                             error[t:t + size, l:l + size].copy(),
                             frame_index, t, l, float(sums[k])))
    return patches


def em_weight_vector(patches: Sequence[Patch], em_map) -> np.ndarray:
    """EM mass under each patch footprint, normalized to sum to 1.

    ``em_map`` is one raster or a mapping from frame index to raster.
    Zero total mass falls back to uniform weights with a warning.
    """
    if not patches:
        raise ModelError("no patches")
    sums = np.empty(len(patches))
    for i, p in enumerate(patches):
        plane = em_map[p.frame_index] if isinstance(em_map, Mapping) else em_map
        size = p.pixels.shape[0]
        sums[i] = float(np.sum(np.asarray(plane)[p.top:p.top + size, p.left:p.left + size]))
    total = sums.sum()
    if not total > 0:
        warnings.warn("EM weights of the sampled patches are all zero; using uniform weights",
                      RuntimeWarning, stacklevel=2)
        return np.full(len(patches), 1.0 / len(patches))
    return sums / total


# -- Sobel / total variation --------------------------------------------------

SOBEL_H = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_V = SOBEL_H.T

_SMOOTH = (1.0, 2.0, 1.0)
_DIFF = (-1.0, 0.0, 1.0)
# separable factors (row kernel, column kernel) of each Sobel kernel
_SEPARABLE = {"h": (_SMOOTH, _DIFF), "v": (_DIFF, _SMOOTH)}


def _reflect_pad(maps):
    # one-pixel symmetric padding: a | a b c | c
    return np.pad(maps, [(0, 0)] * (maps.ndim - 2) + [(1, 1), (1, 1)], mode="symmetric")


def _fold_pad(grad_padded):
    """Adjoint of :func:`_reflect_pad`."""
    g = grad_padded[..., 1:-1, :].copy()
    g[..., 0, :] += grad_padded[..., 0, :]
    g[..., -1, :] += grad_padded[..., -1, :]
    out = g[..., 1:-1].copy()
    out[..., 0] += g[..., 0]
    out[..., -1] += g[..., -1]
    return out


def _correlate_padded(padded, direction):
    rows, cols = _SEPARABLE[direction]
    h, w = padded.shape[-2] - 2, padded.shape[-1] - 2
    tmp = sum(c * padded[..., :, j:j + w] for j, c in enumerate(cols) if c)
    return sum(r * tmp[..., i:i + h, :] for i, r in enumerate(rows) if r)


def _correlate_adjoint(grad, direction):
    rows, cols = _SEPARABLE[direction]
    h, w = grad.shape[-2:]
    tmp = np.zeros(grad.shape[:-2] + (h + 2, w))
    for i, r in enumerate(rows):
        if r:
            tmp[..., i:i + h, :] += r * grad
    padded = np.zeros(grad.shape[:-2] + (h + 2, w + 2))
    for j, c in enumerate(cols):
        if c:
            padded[..., :, j:j + w] += c * tmp
    return padded


def sobel(maps, kernel) -> np.ndarray:
    """3x3 Sobel correlation with reflective borders over the last two axes.

    ``kernel`` is :data:`SOBEL_H` (horizontal derivative) or :data:`SOBEL_V`.
    """
    direction = "h" if np.array_equal(kernel, SOBEL_H) else "v"
    if direction == "v" and not np.array_equal(kernel, SOBEL_V):
        raise ModelError("only the two standard Sobel kernels are supported")
    return _correlate_padded(_reflect_pad(np.asarray(maps, dtype=float)), direction)


def tv_penalty(maps, exponent: float = 1.5, with_grad: bool = False):
    """Mean over maps and pixels of ``(Sobel_h^2 + Sobel_v^2) ** exponent``.

    ``maps`` has shape ``(n, H, W)``.  With ``with_grad`` also returns the
    gradient with respect to ``maps``.
    """
    maps = np.asarray(maps, dtype=float)
    if maps.ndim != 3 or maps.shape[0] == 0:
        raise ModelError("tv_penalty expects a nonempty (n, H, W) stack")
    n, h, w = maps.shape
    padded = _reflect_pad(maps)
    gh = _correlate_padded(padded, "h")
    gv = _correlate_padded(padded, "v")
    mag2 = gh * gh + gv * gv
    if exponent == 1.5:
        powered = mag2 * np.sqrt(mag2)
    else:
        powered = mag2 ** exponent
    value = float(np.sum(powered)) / (n * h * w)
    if not with_grad:
        return value
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(mag2 > 0, 2.0 * exponent * powered / np.where(mag2 > 0, mag2, 1.0), 0.0)
    coef /= n * h * w
    grad = _fold_pad(_correlate_adjoint(coef * gh, "h") + _correlate_adjoint(coef * gv, "v"))
    return value, grad


# -- local scorer --------------------------------------------------------------

class LocalScorer:
    """Interface for patch scorers.

    A scorer maps a stack of patches and their error maps, each shaped
    ``(K, H, W)``, to ``K`` local scores and ``K`` sensitivity maps, and
    back-propagates gradients of those outputs to its parameters and to the
    error maps.
    """

    def param_names(self) -> list[tuple[str, tuple[int, ...]]]:
        raise NotImplementedError

    @property
    def params(self) -> np.ndarray:
        raise NotImplementedError

    @params.setter
    def params(self, value) -> None:
        raise NotImplementedError

    def forward(self, pixels, errors):
        """Return ``(scores, maps, cache)``."""
        raise NotImplementedError

    def backward(self, cache, d_scores, d_maps):
        """Return ``(d_params, d_errors)``."""
        raise NotImplementedError

    def evaluate(self, pixels, error):
        """Score one patch; returns ``(score, sensitivity_map)``."""
        scores, maps, _ = self.forward(np.asarray(pixels)[None], np.asarray(error)[None])
        return float(scores[0]), maps[0]


class LinearScorer(LocalScorer):
    """Affine scorer over error statistics.

    The sensitivity map is affine in the normalized patch intensity,
    ``M = a0 + a1 * pixels / 255``, and the local score is

        q = c0 + c1 * mean(e) + c2 * max(e) + c3 * mean(M * e)
    """

    N_PARAMS = 6

    def __init__(self, params=None):
        if params is None:
            params = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        self._p = np.array(params, dtype=float)
        if self._p.shape != (self.N_PARAMS,):
            raise ModelError(f"LinearScorer takes {self.N_PARAMS} parameters")

    def param_names(self):
        return [("scorer", (self.N_PARAMS,))]

    @property
    def params(self):
        return self._p

    @params.setter
    def params(self, value):
        value = np.array(value, dtype=float)
        if value.shape != (self.N_PARAMS,):
            raise ModelError(f"LinearScorer takes {self.N_PARAMS} parameters")
        self._p = value

    def forward(self, pixels, errors):
        x = np.asarray(pixels, dtype=float) / 255.0
        e = np.asarray(errors, dtype=float)
        a0, a1, c0, c1, c2, c3 = self._p
        maps = a0 + a1 * x
        k = e.shape[0]
        flat_e = e.reshape(k, -1)
        mean_e = flat_e.mean(axis=1)
        arg = flat_e.argmax(axis=1)
        max_e = flat_e[np.arange(k), arg]
        mean_me = (maps * e).reshape(k, -1).mean(axis=1)
        scores = c0 + c1 * mean_e + c2 * max_e + c3 * mean_me
        return scores, maps, (x, e, maps, mean_e, max_e, mean_me, arg)

    def backward(self, cache, d_scores, d_maps):
        x, e, maps, mean_e, max_e, mean_me, arg = cache
        a0, a1, c0, c1, c2, c3 = self._p
        k = e.shape[0]
        npix = e[0].size
        ds = np.asarray(d_scores, dtype=float)
        # maps enter both the TV term (d_maps) and the weighted-error feature
        d_m = np.asarray(d_maps, dtype=float) + (ds * c3 / npix)[:, None, None] * e
        grad = np.array([
            d_m.sum(),
            (d_m * x).sum(),
            ds.sum(),
            ds @ mean_e,
            ds @ max_e,
            ds @ mean_me,
        ])
        d_e = (ds * c1 / npix)[:, None, None] + (ds * c3 / npix)[:, None, None] * maps
        flat = d_e.reshape(k, -1)
        flat[np.arange(k), arg] += ds * c2
        return grad, flat.reshape(e.shape)


# -- model ------------------------------------------------------------------

@dataclass
class TrainingItem:
    """One sequence: its sampled patches, EM pooling weights and target DMOS."""

    pixels: np.ndarray
    errors: np.ndarray
    weights: np.ndarray
    dmos: float

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.pixels.shape != self.errors.shape or self.pixels.ndim != 3:
            raise ModelError("pixels and errors must be equal (n, H, W) stacks")
        if self.weights.shape != (self.pixels.shape[0],):
            raise ModelError("one pooling weight per patch required")

    @classmethod
    def from_patches(cls, patches: Sequence[Patch], weights, dmos: float) -> "TrainingItem":
        return cls(np.stack([p.pixels for p in patches]), np.stack([p.error for p in patches]),
                   weights, dmos)


@dataclass
class Head:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    @classmethod
    def identity(cls, width: int = HEAD_WIDTH) -> "Head":
        """Passes non-negative inputs through unchanged."""
        return cls(np.full(width, 1.0 / width), np.zeros(width), np.ones(width), 0.0)

    @classmethod
    def random(cls, rng, width: int = HEAD_WIDTH, scale: float = 0.1) -> "Head":
        head = cls.identity(width)
        head.w1 = head.w1 * (1.0 + scale * rng.standard_normal(width))
        head.w2 = head.w2 * (1.0 + scale * rng.standard_normal(width))
        return head

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1, self.b1, self.w2, [self.b2]])

    @classmethod
    def from_flat(cls, vec) -> "Head":
        vec = np.asarray(vec, dtype=float)
        width = (len(vec) - 1) // 3
        if len(vec) != 3 * width + 1:
            raise ModelError("bad head parameter vector length")
        return cls(vec[:width].copy(), vec[width:2 * width].copy(),
                   vec[2 * width:3 * width].copy(), float(vec[-1]))


def aggregate(local_scores, weights, head: Head) -> float:
    """Inner product of local scores and weights, then the two-layer ReLU head."""
    q = np.asarray(local_scores, dtype=float)
    w = np.asarray(weights, dtype=float)
    if q.shape != w.shape:
        raise ModelError(f"length mismatch: {q.shape} scores vs {w.shape} weights")
    pooled = float(q @ w)
    hidden = np.maximum(head.w1 * pooled + head.b1, 0.0)
    return float(head.w2 @ hidden + head.b2)


@dataclass
class LossWeights:
    mse: float = 1e3
    tv: float = 1.0
    l2: float = 5e-3


@dataclass
class LossTerms:
    total: float
    mse: float
    tv: float
    l2: float


class PerceptualModel:
    """Local scorer plus pooling head; ``params`` is the flat vector of both."""

    def __init__(self, scorer: Optional[LocalScorer] = None, head: Optional[Head] = None):
        self.scorer = scorer if scorer is not None else LinearScorer()
        self.head = head if head is not None else Head.identity()

    @property
    def n_scorer(self) -> int:
        return len(self.scorer.params)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.scorer.params, self.head.flat()])

    @params.setter
    def params(self, vec):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != self.params.shape:
            raise ModelError(f"expected {self.params.shape[0]} parameters, got {vec.shape}")
        self.scorer.params = vec[:self.n_scorer]
        self.head = Head.from_flat(vec[self.n_scorer:])

    def manifest(self) -> list[tuple[str, tuple[int, ...]]]:
        width = len(self.head.w1)
        return self.scorer.param_names() + [
            ("head.w1", (width,)), ("head.b1", (width,)), ("head.w2", (width,)), ("head.b2", (1,))]

    def predict(self, item: TrainingItem) -> float:
        scores, _, _ = self.scorer.forward(item.pixels, item.errors)
        return aggregate(scores, item.weights, self.head)

    def loss(self, items: Sequence[TrainingItem], lambdas: LossWeights = LossWeights(),
             tv_exponent: float = 1.5, with_grad: bool = True):
        """Training objective over a batch; returns ``(terms, grad)``.

        ``grad`` is None unless ``with_grad``.  The TV term averages over all
        patches of the batch.
        """
        if not items:
            raise ModelError("empty batch")
        counts = [it.pixels.shape[0] for it in items]
        pixels = np.concatenate([it.pixels for it in items])
        errors = np.concatenate([it.errors for it in items])
        scores, maps, cache = self.scorer.forward(pixels, errors)
        bounds = np.cumsum([0] + counts)
        head = self.head
        beta = self.params

        pooled = np.array([scores[bounds[b]:bounds[b + 1]] @ it.weights for b, it in enumerate(items)])
        pre = np.outer(pooled, head.w1) + head.b1
        hidden = np.maximum(pre, 0.0)
        pred = hidden @ head.w2 + head.b2
        target = np.array([it.dmos for it in items])
        resid = pred - target
        mse = float(resid @ resid)
        tv_val = tv_penalty(maps, tv_exponent, with_grad=with_grad)
        tv, d_maps = (tv_val if with_grad else (tv_val, None))
        l2 = float(beta @ beta)
        terms = LossTerms(lambdas.mse * mse + lambdas.tv * tv + lambdas.l2 * l2, mse, tv, l2)
        if not with_grad:
            return terms, None

        d_pred = 2.0 * lambdas.mse * resid
        d_w2 = hidden.T @ d_pred
        d_b2 = d_pred.sum()
        d_pre = np.outer(d_pred, head.w2) * (pre > 0)
        d_w1 = d_pre.T @ pooled
        d_b1 = d_pre.sum(axis=0)
        d_pooled = d_pre @ head.w1
        d_scores = np.concatenate([d_pooled[b] * it.weights for b, it in enumerate(items)])
        d_scorer, _ = self.scorer.backward(cache, d_scores, lambdas.tv * d_maps)
        grad = np.concatenate([d_scorer, d_w1, d_b1, d_w2, [d_b2]]) + 2.0 * lambdas.l2 * beta
        return terms, grad


# -- training ---------------------------------------------------------------

@dataclass
class TrainConfig:
    learning_rate: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    nesterov: bool = True
    epochs: int = 80
    batch_size: int = 0  # 0 means full batch
    lambda_mse: float = 1e3
    lambda_tv: float = 1.0
    lambda_l2: float = 5e-3
    tv_exponent: float = 1.5
    seed: int = 0

    @property
    def lambdas(self) -> LossWeights:
        return LossWeights(self.lambda_mse, self.lambda_tv, self.lambda_l2)


def parse_config_text(text: str, base: Optional[TrainConfig] = None) -> TrainConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) into a :class:`TrainConfig`."""
    base = base or TrainConfig()
    types = {f.name: f.type for f in fields(TrainConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise ModelError(f"config line {lineno}: unknown key {key!r}")
        kind = getattr(base, key).__class__
        if kind is bool:
            updates[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            try:
                updates[key] = kind(float(value)) if kind is int else kind(value)
            except ValueError:
                raise ModelError(f"config line {lineno}: bad value {value!r} for {key}") from None
    return replace(base, **updates)


def load_config(path) -> TrainConfig:
    return parse_config_text(Path(path).read_text())


@dataclass
class TrainResult:
    model: PerceptualModel
    history: list[LossTerms] = field(default_factory=list)


class Nadam:
    """Adaptive moment estimation, optionally with Nesterov momentum."""

    def __init__(self, size: int, config: TrainConfig):
        self.cfg = config
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params, grad):
        c = self.cfg
        self.t += 1
        self.m = c.beta1 * self.m + (1 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1 - c.beta2) * grad * grad
        v_hat = self.v / (1 - c.beta2 ** self.t)
        if c.nesterov:
            # look-ahead momentum: next step's bias-corrected moment plus the current gradient
            m_hat = (c.beta1 * self.m / (1 - c.beta1 ** (self.t + 1))
                     + (1 - c.beta1) * grad / (1 - c.beta1 ** self.t))
        else:
            m_hat = self.m / (1 - c.beta1 ** self.t)
        return params - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)


def train(items: Sequence[TrainingItem], model: Optional[PerceptualModel] = None,
          config: TrainConfig = TrainConfig()) -> TrainResult:
    """Minimize the training objective with Nadam.

    ``history`` holds the full-dataset loss terms before the first update
    and after every epoch.  Raises :class:`TrainingError` on a non-finite
    loss.
    """
    if not items:
        raise ModelError("no training items")
    rng = np.random.default_rng(config.seed)
    if model is None:
        model = PerceptualModel(LinearScorer(), Head.random(rng))
    opt = Nadam(len(model.params), config)
    lam = config.lambdas
    batch = config.batch_size or len(items)
    full = batch >= len(items)
    history = [] if full else [model.loss(items, lam, config.tv_exponent, with_grad=False)[0]]
    for epoch in range(config.epochs):
        order = np.arange(len(items)) if full else rng.permutation(len(items))
        for start in range(0, len(items), batch):
            chunk = [items[i] for i in order[start:start + batch]]
            with np.errstate(invalid="ignore", over="ignore"):
                terms, grad = model.loss(chunk, lam, config.tv_exponent)
            if not (math.isfinite(terms.total) and np.all(np.isfinite(grad))):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}: total={terms.total} mse={terms.mse} "
                    f"tv={terms.tv} l2={terms.l2}, |beta|={np.linalg.norm(model.params):.3g}")
            if full:
                # the full-batch loss before this step is the previous epoch's end state
                history.append(terms)
            model.params = opt.step(model.params, grad)
        if not full:
            history.append(model.loss(items, lam, config.tv_exponent, with_grad=False)[0])
        log.debug("epoch %d loss %.6g", epoch, history[-1].total)
    if full:
        history.append(model.loss(items, lam, config.tv_exponent, with_grad=False)[0])
    return TrainResult(model, history)


# -- persistence --------------------------------------------------------------

def save_params(model: PerceptualModel, path) -> None:
    """Write the flat parameter vector (little-endian float64) and a shape manifest."""
    path = Path(path)
    path.write_bytes(model.params.astype("<f8").tobytes())
    lines = [f"{name} {' '.join(str(d) for d in shape)}" for name, shape in model.manifest()]
    Path(str(path) + ".manifest").write_text("\n".join(lines) + "\n")


def load_params(path) -> dict[str, np.ndarray]:
    """Read a parameter file written by :func:`save_params` into named arrays."""
    path = Path(path)
    flat = np.frombuffer(path.read_bytes(), dtype="<f8")
    out = {}
    offset = 0
    for line in Path(str(path) + ".manifest").read_text().splitlines():
        if not line.strip():
            continue
        name, *dims = line.split()
        shape = tuple(int(d) for d in dims)
        size = int(np.prod(shape))
        if offset + size > len(flat):
            raise ModelError(f"parameter file too short for {name}")
        out[name] = flat[offset:offset + size].reshape(shape).copy()
        offset += size
    if offset != len(flat):
        raise ModelError(f"parameter file holds {len(flat)} values, manifest lists {offset}")
    return out


def load_model(path, scorer: Optional[LocalScorer] = None) -> PerceptualModel:
    model = PerceptualModel(scorer or LinearScorer())
    arrays = load_params(path)
    model.params = np.concatenate([arrays[name].ravel() for name, _ in model.manifest()])
    return model


# -- sequence assembly ---------------------------------------------------------

def prepare_sequence(ref_frames, imp_frames, hm_maps, em_maps, n: int, dmos: float = 0.0,
                     seed=None, width: int = TARGET_WIDTH, interval: int = FRAME_INTERVAL,
                     size: int = PATCH_SIZE, stride: int = PATCH_STRIDE) -> TrainingItem:
    """Build a :class:`TrainingItem` from full sequences and per-frame weight maps.

    ``hm_maps``/``em_maps`` are indexable by original frame index.  The
    ``n`` patches are split evenly over the retained frames (earlier frames
    take the remainder); maps are resized to the working resolution.
    """
    pairs = preprocess(ref_frames, imp_frames, width, interval)
    rng = np.random.default_rng(seed)
    base, extra = divmod(n, len(pairs))
    patches = []
    em_planes = {}
    for k, pair in enumerate(pairs):
        count = base + (1 if k < extra else 0)
        h, w = pair.ref.shape
        em_planes[pair.index] = resize_plane(em_maps[pair.index], w, h)
        if count == 0:
            continue
        hm = resize_plane(hm_maps[pair.index], w, h)
        patches += sample_patches(pair.imp, pair.error, hm, count, rng, pair.index, size, stride)
    weights = em_weight_vector(patches, em_planes)
    for p, wgt in zip(patches, weights):
        p.em_weight = float(wgt)
    return TrainingItem.from_patches(patches, weights, dmos)
