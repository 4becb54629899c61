"""Accuracy-versus-uncertainty calibration losses.

The hard loss partitions a batch by accuracy and by an entropy threshold
kappa (entropy in nats; h <= kappa counts as certain) and rewards mass in
the accurate-certain and inaccurate-uncertain cells:

    loss = log(1 + (n_AU + n_IC) / (n_AC + n_IU))

with counts weighted by confidence and tanh(entropy).  The gradient-stopped
variant (AvUC-GS) has the same forward value but treats the confidence
multiplicands c_i and (1 - c_i) as constants in the backward pass, removing
the incentive to inflate confidence on inaccurate-certain examples.

The soft loss (S-AvUC) replaces the entropy indicator with a smooth
uncertainty score t in (0, 1) obtained by a temperature-scaled logistic on
the log-odds of the normalized entropy against the threshold, so only the
accuracy partition stays hard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import PredictionSummary
from .metrics import confidence_logit_jacobian, entropy_logit_jacobian

# Normalized entropy is clamped to this interval before the log-odds.
_HSTAR_LO = 1e-7
_HSTAR_HI = 1.0 - 1e-7


class DegenerateBatchError(ValueError):
    """The denominator count (n_AC + n_IU) vanished, so the loss is undefined."""


@dataclass(frozen=True)
class AvucSpec:
    """kappa: entropy threshold (nats for the hard loss, normalized-entropy
    fraction in (0, 1) for the soft loss).  temperature: softness of the
    uncertainty score, required by the soft loss.  gradient_stopping: freeze
    the confidence multiplicands in the hard loss's backward pass."""

    kappa: float = 0.5
    temperature: float | None = None
    gradient_stopping: bool = False

    def __post_init__(self):
        if not np.isfinite(self.kappa) or self.kappa <= 0:
            raise ValueError(f"kappa must be finite and > 0, got {self.kappa}")
        if self.temperature is not None and (
            not np.isfinite(self.temperature) or self.temperature <= 0
        ):
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class AvucCounts:
    """Weighted mass per accuracy x certainty cell."""

    n_ac: float
    n_au: float
    n_ic: float
    n_iu: float

    @property
    def numerator(self) -> float:
        return self.n_au + self.n_ic

    @property
    def denominator(self) -> float:
        return self.n_ac + self.n_iu


def soft_uncertainty(hstar, kappa: float, temperature: float):
    """Smooth uncertainty score in (0, 1) from normalized entropy.

    t = logistic((1/T) * [logit(h*) - logit(kappa)]), with h* clamped to
    [1e-7, 1 - 1e-7].  t(kappa) = 0.5 for every temperature, and
    kappa = 0.5, T = 1 gives the identity t(h*) = h*.
    """
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if not np.isfinite(temperature) or temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    h = np.clip(np.asarray(hstar, dtype=np.float64), _HSTAR_LO, _HSTAR_HI)
    # Writing the argument as a difference of identical expressions makes
    # t(kappa) exactly 0.5 in floating point.
    z = (np.log(h / (1.0 - h)) - np.log(kappa / (1.0 - kappa))) / temperature
    out = expit(z)
    return float(out) if np.ndim(hstar) == 0 else out


def soft_uncertainty_grad(hstar, kappa: float, temperature: float):
    """dt/dh* = t (1 - t) / (T h* (1 - h*)); zero in the clamped region."""
    h_raw = np.asarray(hstar, dtype=np.float64)
    h = np.clip(h_raw, _HSTAR_LO, _HSTAR_HI)
    t = soft_uncertainty(h, kappa, temperature)
    grad = t * (1.0 - t) / (temperature * h * (1.0 - h))
    grad = np.where((h_raw < _HSTAR_LO) | (h_raw > _HSTAR_HI), 0.0, grad)
    return float(grad) if np.ndim(hstar) == 0 else grad


def _loss_from(q: float, d: float) -> float:
    if d <= 0.0:
        raise DegenerateBatchError(
            f"denominator count n_AC + n_IU = {d}; batch has no accurate-certain "
            "or inaccurate-uncertain mass"
        )
    return float(np.log1p(q / d))


def avuc_counts(
    conf: np.ndarray, tanh_ent: np.ndarray, certain: np.ndarray, acc: np.ndarray
) -> AvucCounts:
    """Weighted counts of the four accuracy x certainty cells.

    Exposed separately so callers can freeze individual factors (the
    gradient-stopped finite-difference oracle does exactly that).
    """
    acc = acc.astype(bool)
    unc = ~certain
    return AvucCounts(
        n_ac=float((conf * (1.0 - tanh_ent))[acc & certain].sum()),
        n_au=float((conf * tanh_ent)[acc & unc].sum()),
        n_ic=float(((1.0 - conf) * (1.0 - tanh_ent))[~acc & certain].sum()),
        n_iu=float(((1.0 - conf) * tanh_ent)[~acc & unc].sum()),
    )


def avuc(summary: PredictionSummary, spec: AvucSpec) -> tuple[float, AvucCounts]:
    """Hard-threshold AvUC loss; h = kappa counts as certain."""
    certain = summary.entropy <= spec.kappa
    counts = avuc_counts(summary.confidence, np.tanh(summary.entropy), certain, summary.accuracy)
    return _loss_from(counts.numerator, counts.denominator), counts


def avuc_grad(summary: PredictionSummary, spec: AvucSpec) -> tuple[float, np.ndarray]:
    """AvUC value and gradient with respect to the logits, shape (N, K).

    With spec.gradient_stopping the confidence factors are held constant, so
    gradient flows only through tanh(h); the forward value is unchanged.
    """
    c = summary.confidence
    h = summary.entropy
    a = summary.accuracy.astype(bool)
    w = np.tanh(h)
    sech2 = 1.0 - w**2
    certain = h <= spec.kappa

    counts = avuc_counts(c, w, certain, summary.accuracy)
    q, d = counts.numerator, counts.denominator
    value = _loss_from(q, d)
    dl_dq = 1.0 / (q + d)
    dl_dd = 1.0 / (q + d) - 1.0 / d

    au = a & ~certain
    ac = a & certain
    ic = ~a & certain
    iu = ~a & ~certain

    # Per-example derivative of its cell term with respect to c_i and h_i,
    # scaled by the loss derivative for the count the cell feeds.
    dc = np.zeros_like(c)
    dh = np.zeros_like(h)
    dc[au] = dl_dq * w[au]
    dh[au] = dl_dq * c[au] * sech2[au]
    dc[ac] = dl_dd * (1.0 - w[ac])
    dh[ac] = -dl_dd * c[ac] * sech2[ac]
    dc[ic] = -dl_dq * (1.0 - w[ic])
    dh[ic] = -dl_dq * (1.0 - c[ic]) * sech2[ic]
    dc[iu] = -dl_dd * w[iu]
    dh[iu] = dl_dd * (1.0 - c[iu]) * sech2[iu]
    if spec.gradient_stopping:
        dc[:] = 0.0

    grad = dc[:, None] * confidence_logit_jacobian(summary) + dh[:, None] * entropy_logit_jacobian(summary)
    return value, grad


def s_avuc_counts(soft_unc: np.ndarray, tanh_ent: np.ndarray, acc: np.ndarray) -> AvucCounts:
    """Soft counts: every example contributes to both its numerator and
    denominator cell, weighted by t and (1 - t)."""
    acc = acc.astype(bool)
    tw = soft_unc * tanh_ent
    cw = (1.0 - soft_unc) * (1.0 - tanh_ent)
    return AvucCounts(
        n_ac=float(cw[acc].sum()),
        n_au=float(tw[acc].sum()),
        n_ic=float(cw[~acc].sum()),
        n_iu=float(tw[~acc].sum()),
    )


def s_avuc(summary: PredictionSummary, spec: AvucSpec) -> tuple[float, AvucCounts]:
    """Soft AvUC: entropy indicator replaced by the smooth uncertainty score."""
    if spec.temperature is None:
        raise ValueError("s_avuc requires AvucSpec.temperature")
    t = soft_uncertainty(summary.norm_entropy, spec.kappa, spec.temperature)
    counts = s_avuc_counts(t, np.tanh(summary.entropy), summary.accuracy)
    return _loss_from(counts.numerator, counts.denominator), counts


def s_avuc_grad(summary: PredictionSummary, spec: AvucSpec) -> tuple[float, np.ndarray]:
    """S-AvUC value and gradient with respect to the logits, shape (N, K)."""
    if spec.temperature is None:
        raise ValueError("s_avuc requires AvucSpec.temperature")
    h = summary.entropy
    hstar = summary.norm_entropy
    a = summary.accuracy.astype(bool)
    w = np.tanh(h)
    sech2 = 1.0 - w**2
    log_k = np.log(summary.num_classes)

    t = soft_uncertainty(hstar, spec.kappa, spec.temperature)
    dt_dh = soft_uncertainty_grad(hstar, spec.kappa, spec.temperature) / log_k

    counts = s_avuc_counts(t, w, summary.accuracy)
    q, d = counts.numerator, counts.denominator
    value = _loss_from(q, d)
    dl_dq = 1.0 / (q + d)
    dl_dd = 1.0 / (q + d) - 1.0 / d

    # d(t w)/dh and d((1-t)(1-w))/dh; accurate examples feed t*w into the
    # numerator and (1-t)(1-w) into the denominator, inaccurate the reverse.
    d_tw = dt_dh * w + t * sech2
    d_cw = -dt_dh * (1.0 - w) - (1.0 - t) * sech2
    dh = np.where(a, dl_dq * d_tw + dl_dd * d_cw, dl_dq * d_cw + dl_dd * d_tw)

    grad = dh[:, None] * entropy_logit_jacobian(summary)
    return value, grad
