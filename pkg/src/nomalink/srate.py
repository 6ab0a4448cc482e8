"""Semantic rate model: accuracy-vs-SNR curves and per-source rates.

Task accuracy as a function of the effective linear SNR gamma is modeled
by a generalized logistic

    xi(gamma) = a1 + (a2 - a1) / (1 + exp(-(c1 * gamma + c2)))

with floor a1, ceiling a2 and slope c1 > 0.  The semantic rate of a
source is the accuracy times a units prefactor:

    text  : (W * info_per_item / (k_symbols * length_per_item)) * xi
    image : (W * info_per_item / (compression * length_per_item)) * xi

where W is the occupied bandwidth.  Accuracy samples can be ingested
from two-column CSVs (gamma_db, accuracy) and fitted with a
deterministic variable-projection gradient descent.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

KIND_TEXT = "text"
KIND_IMAGE = "image"

FIT_MAX_ITERS = 5000
FIT_GRAD_TOL = 1e-12
FIT_RESIDUAL_WARN = 0.05
DEGENERATE_SPAN = 1e-9


class AccuracyRangeError(ValueError):
    """Requested accuracy outside the open range (a1, a2) of the model."""


@dataclass(frozen=True)
class SourceProfile:
    """Units of one semantic source.

    kind 'text' divides by k_symbols (average symbols per word); kind
    'image' divides by compression (compression ratio).  info_per_item
    and length_per_item default to 1 so rates come out in units of
    semantic content per item.
    """

    kind: str
    info_per_item: float = 1.0
    length_per_item: float = 1.0
    k_symbols: float | None = None
    compression: float | None = None

    def __post_init__(self):
        if self.kind not in (KIND_TEXT, KIND_IMAGE):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.info_per_item <= 0 or self.length_per_item <= 0:
            raise ValueError("per-item info and length must be positive")
        if self.kind == KIND_TEXT:
            if self.k_symbols is None or self.compression is not None:
                raise ValueError("text profile needs k_symbols and no compression")
            if self.k_symbols <= 0:
                raise ValueError("k_symbols must be positive")
        else:
            if self.compression is None or self.k_symbols is not None:
                raise ValueError("image profile needs compression and no k_symbols")
            if not (0 < self.compression <= 1):
                raise ValueError("compression must lie in (0, 1]")

    @property
    def denominator(self) -> float:
        return self.k_symbols if self.kind == KIND_TEXT else self.compression


def text_profile(k_symbols: float = 128.0, info_per_item: float = 1.0,
                 length_per_item: float = 1.0) -> SourceProfile:
    return SourceProfile(KIND_TEXT, info_per_item, length_per_item, k_symbols=k_symbols)


def image_profile(compression: float = 0.33, info_per_item: float = 1.0,
                  length_per_item: float = 1.0) -> SourceProfile:
    return SourceProfile(KIND_IMAGE, info_per_item, length_per_item, compression=compression)


@dataclass(frozen=True)
class AccuracyModel:
    """Generalized logistic accuracy curve over linear SNR."""

    a1: float
    a2: float
    c1: float
    c2: float

    def __post_init__(self):
        if not (self.a2 > self.a1):
            raise ValueError("accuracy ceiling must exceed the floor")


def xi_eval(model: AccuracyModel, gamma) -> np.ndarray | float:
    """Accuracy at linear SNR gamma (scalar or array)."""
    g = np.asarray(gamma, dtype=float)
    z = model.c1 * g + model.c2
    out = model.a1 + (model.a2 - model.a1) / (1.0 + np.exp(-z))
    return float(out) if out.ndim == 0 else out


def xi_inverse(model: AccuracyModel, target: float) -> float:
    """Linear SNR at which the model reaches the target accuracy.

    Only defined on the open range (a1, a2); raises AccuracyRangeError
    outside it.
    """
    if not (model.a1 < target < model.a2):
        raise AccuracyRangeError(
            f"target {target} outside accuracy range ({model.a1}, {model.a2})")
    frac = (target - model.a1) / (model.a2 - model.a1)
    return (math.log(frac / (1.0 - frac)) - model.c2) / model.c1


def gamma_required(model: AccuracyModel, target: float) -> float:
    """xi_inverse extended to the whole line for feasibility arithmetic.

    Targets at or below the floor need no SNR (-inf), targets at or
    above the ceiling are unreachable (+inf).
    """
    if target <= model.a1:
        return -math.inf
    if target >= model.a2:
        return math.inf
    return xi_inverse(model, target)


def s_rate(profile: SourceProfile, model: AccuracyModel, bandwidth_w: float,
           gamma: float) -> float:
    """Semantic rate at linear SNR gamma over bandwidth_w."""
    if gamma < 0:
        raise ValueError("linear SNR must be >= 0")
    if bandwidth_w < 0:
        raise ValueError("bandwidth must be >= 0")
    pref = bandwidth_w * profile.info_per_item / (profile.denominator * profile.length_per_item)
    return pref * xi_eval(model, gamma)


def rate_prefactor(profile: SourceProfile, bandwidth_w: float) -> float:
    return bandwidth_w * profile.info_per_item / (profile.denominator * profile.length_per_item)


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class FitResult:
    model: AccuracyModel
    residual_rms: float
    iterations: int
    warning: str | None = None


def _project_linear(gamma: np.ndarray, acc: np.ndarray, c1: float, c2: float):
    """Best (a1, a2) for fixed slope via linear least squares."""
    sig = 1.0 / (1.0 + np.exp(-(c1 * gamma + c2)))
    design = np.stack([1.0 - sig, sig], axis=1)
    coef, *_ = np.linalg.lstsq(design, acc, rcond=None)
    resid = design @ coef - acc
    return coef[0], coef[1], sig, resid


def fit_logistic(samples) -> FitResult:
    """Least-squares generalized logistic fit.

    Variable projection: the two accuracy levels are solved exactly for
    any slope pair, and (c1, c2) follow deterministic gradient descent
    with Armijo backtracking from a logit-linearized start.  Degenerate
    (constant) inputs are flagged with a warning instead of an error.
    """
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (gamma, accuracy) samples")
    gamma, acc = pts[:, 0], pts[:, 1]
    if np.any((acc < 0) | (acc > 1)):
        raise ValueError("accuracies must lie in [0, 1]")

    span = acc.max() - acc.min()
    if span < DEGENERATE_SPAN:
        lvl = float(acc.mean())
        model = AccuracyModel(lvl - 1e-9, lvl + 1e-9, 1.0, 0.0)
        return FitResult(model, 0.0, 0, warning="degenerate fit: constant accuracy, a1 == a2")

    # logit-linearized start for the slope parameters
    lo = acc.min() - 0.05 * span
    hi = acc.max() + 0.05 * span
    z = np.log((acc - lo) / (hi - acc))
    design = np.stack([gamma, np.ones_like(gamma)], axis=1)
    (c1, c2), *_ = np.linalg.lstsq(design, z, rcond=None)

    def objective(c1, c2):
        a1, a2, sig, resid = _project_linear(gamma, acc, c1, c2)
        f = float(np.sum(resid**2))
        # envelope theorem: (a1, a2) are optimal, so only explicit deps count
        w = 2.0 * resid * (a2 - a1) * sig * (1.0 - sig)
        return f, np.array([float(np.sum(w * gamma)), float(np.sum(w))]), (a1, a2)

    c = np.array([c1, c2], dtype=float)
    f, grad, levels = objective(*c)
    iters = 0
    for iters in range(1, FIT_MAX_ITERS + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm < FIT_GRAD_TOL * (1.0 + abs(f)):
            break
        step = 1.0
        while step > 1e-16:
            cand = c - step * grad
            fc, gc, lc = objective(*cand)
            if fc <= f - 1e-4 * step * gnorm**2:
                c, f, grad, levels = cand, fc, gc, lc
                break
            step *= 0.5
        else:
            break  # no descent step found, converged to tolerance

    a1, a2 = levels
    warning = None
    if a2 <= a1:
        a1, a2 = min(a1, a2) - 1e-9, max(a1, a2) + 1e-9
        warning = "ill-ordered levels straightened"
    if c[0] <= 0:
        warning = "non-increasing fit (c1 <= 0)"
    rms = math.sqrt(f / len(acc))
    if rms > FIT_RESIDUAL_WARN and warning is None:
        warning = f"poor fit: residual rms {rms:.3g}"
    return FitResult(AccuracyModel(float(a1), float(a2), float(c[0]), float(c[1])),
                     rms, iters, warning)


# ---------------------------------------------------------------------------
# sample curves and CSV ingestion

def load_accuracy_csv(path) -> np.ndarray:
    """Read (gamma_db, accuracy) rows; returns (gamma_linear, accuracy) pairs.

    The header row naming the two columns is required; gamma is converted
    from dB to linear scale.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty accuracy CSV: {path}") from None
        cols = [c.strip().lower() for c in header]
        if cols[:2] != ["gamma_db", "accuracy"]:
            raise ValueError(f"{path}: expected header 'gamma_db,accuracy', got {header!r}")
        rows = []
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            rows.append((10.0 ** (float(row[0]) / 10.0), float(row[1])))
    if not rows:
        raise ValueError(f"no data rows in accuracy CSV: {path}")
    return np.asarray(rows)


# ground-truth curves behind the shipped synthetic samples; the text curve
# saturates slowly with SNR, the image curve earlier and more sharply
TRUE_TEXT_CURVE = AccuracyModel(a1=0.10, a2=0.95, c1=0.5, c2=-1.5)
TRUE_IMAGE_CURVE = AccuracyModel(a1=0.05, a2=0.90, c1=3.0, c2=-0.5)


def synthetic_accuracy_samples(kind: str, n: int = 40, noise: float = 0.0,
                               seed: int = 0) -> np.ndarray:
    """(gamma, accuracy) samples from the shipped ground-truth curves.

    gamma is linear, log-spaced over [-12, 18] dB.  Optional additive
    noise is seeded and clipped back into [0, 1].
    """
    if kind == KIND_TEXT:
        model = TRUE_TEXT_CURVE
    elif kind == KIND_IMAGE:
        model = TRUE_IMAGE_CURVE
    else:
        raise ValueError(f"unknown source kind {kind!r}")
    gamma = 10.0 ** (np.linspace(-12.0, 18.0, n) / 10.0)
    acc = xi_eval(model, gamma)
    if noise > 0:
        g = np.random.Generator(np.random.Philox(key=seed))
        acc = np.clip(acc + noise * g.standard_normal(n), 0.0, 1.0)
    return np.stack([gamma, acc], axis=1)


def write_accuracy_csv(path, samples: np.ndarray):
    """Write (gamma_linear, accuracy) samples in the ingestion format."""
    with open(path, "w", newline="\n") as fh:
        fh.write("gamma_db,accuracy\n")
        for gamma, acc in samples:
            fh.write(f"{10.0 * math.log10(gamma):.10g},{acc:.10g}\n")
