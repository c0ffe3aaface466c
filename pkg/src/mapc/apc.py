"""Reiterative MMSE adaptive pulse compression on a compensation-matrix bank.

Every iteration builds one structured covariance

    C = F diag(p) F^H + sigma^2 I   (+ loading)

factors it once (Cholesky) and derives all L gain-constrained filters

    w_l = C^-1 f_l / (f_l^H C^-1 f_l)

from that single factorization.  The MIMO variant adds the fixed
matched-filter power of the other transmitters to ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .stretch import CompensationMatrix, RangeProfile, matched_filter
from .synth import ShapeError


class CovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ApcSettings:
    max_iterations: int = 3
    early_stop_rel_change: float = 1e-3
    diagonal_loading_factor: float = 0.0
    noise_power_override: float | None = None
    # literal reading that adds the signal term twice: 2 F P F^H + sigma^2 I
    double_count_signal: bool = False

    def __post_init__(self):
        if not 1 <= self.max_iterations <= 10:
            raise ValueError("max_iterations must be in [1, 10]")
        if self.diagonal_loading_factor < 0:
            raise ValueError("diagonal loading must be >= 0")


@dataclass
class ApcResult:
    iterations: list = field(default_factory=list)  # RangeProfile per iteration
    condition: list = field(default_factory=list)
    unity_gain_residual: list = field(default_factory=list)
    noise_gain: np.ndarray | None = None  # ||w_l||^2 of the final filters
    filters: np.ndarray | None = field(default=None, repr=False)  # final W, (N_f, L)
    n_factorizations: int = 0
    initial: RangeProfile | None = None

    @property
    def final(self) -> RangeProfile:
        return self.iterations[-1]


def _noise(sigma2, settings: ApcSettings) -> float:
    s2 = settings.noise_power_override if settings.noise_power_override is not None else sigma2
    return float(s2) * (1.0 + settings.diagonal_loading_factor)


def apc_filters(F: CompensationMatrix, power, noise_power: float):
    """Gain-constrained MMSE filters for a diagonal power estimate.

    Returns ``(W, chol_diag)`` where column l of ``W`` is the filter for bin l.
    """
    f = F.entries
    n = f.shape[0]
    p = np.asarray(power, dtype=float)
    cov = (f * p[None, :]) @ f.conj().T
    cov = 0.5 * (cov + cov.conj().T)
    cov[np.diag_indices(n)] += noise_power
    try:
        fac = sla.cho_factor(cov, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise CovarianceError(
            "structured covariance is not positive definite; "
            "supply a positive noise power or enable diagonal loading"
        ) from exc
    z = sla.cho_solve(fac, f)
    denom = np.einsum("ql,ql->l", f.conj(), z)
    if not np.all(np.isfinite(denom)) or np.any(denom.real <= 0):
        raise CovarianceError("degenerate filter normalization")
    return z / denom[None, :], np.abs(np.diag(fac[0]))


def _iterate(F, s, sigma2, settings, p_start, p_cross, result: ApcResult):
    p_prev = p_start
    s2 = _noise(sigma2, settings)
    mult = 2.0 if settings.double_count_signal else 1.0
    w = None
    for _ in range(settings.max_iterations):
        w, dg = apc_filters(F, mult * p_prev + p_cross, s2)
        result.n_factorizations += 1
        x = w.conj().T @ s
        result.iterations.append(F.profile(x))
        result.condition.append(float((dg.max() / dg.min()) ** 2))
        gain = np.einsum("ql,ql->l", w.conj(), F.entries)
        result.unity_gain_residual.append(float(np.max(np.abs(gain - 1.0))))
        p_new = np.abs(x) ** 2
        scale = p_prev.max()
        change = np.max(np.abs(p_new - p_prev)) / scale if scale > 0 else np.inf
        p_prev = p_new
        if change < settings.early_stop_rel_change:
            break
    result.noise_gain = np.sum(np.abs(w) ** 2, axis=0)
    result.filters = w
    return result


def _check(F: CompensationMatrix, s):
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (F.n_fast,):
        raise ShapeError(f"snapshot shape {s.shape} != ({F.n_fast},)")
    return s


def rmmse_baseline(F: CompensationMatrix, s, sigma2: float,
                   settings: ApcSettings | None = None, initial_power=None) -> ApcResult:
    """Single-input RMMSE, initialized from the matched-filter power.

    ``initial_power`` replaces the matched-filter start (zeros reduce the
    first iteration to the matched filter itself).
    """
    settings = settings or ApcSettings()
    s = _check(F, s)
    mf = matched_filter(F, s)
    p0 = mf.power if initial_power is None else np.asarray(initial_power, dtype=float)
    res = ApcResult(initial=mf)
    return _iterate(F, s, sigma2, settings, p0, np.zeros(F.n_bins), res)


def rmmse_mimo(F: CompensationMatrix, snapshots, sigma2,
               settings: ApcSettings | None = None) -> list:
    """Per-transmitter RMMSE with the other transmitters' matched-filter power.

    Transmitter i iterates on its own power estimate while
    ``sum_{j != i} |F^H s_j|^2`` stays fixed in its covariance.  ``sigma2``
    may be a scalar or one value per transmitter.
    """
    settings = settings or ApcSettings()
    snaps = [_check(F, s) for s in np.atleast_2d(np.asarray(snapshots))]
    if not snaps:
        raise ShapeError("need at least one snapshot")
    s2 = np.broadcast_to(np.asarray(sigma2, dtype=float), (len(snaps),))
    mfs = [matched_filter(F, s) for s in snaps]
    p_mf = np.array([m.power for m in mfs])
    total = p_mf.sum(axis=0)
    out = []
    for i, s in enumerate(snaps):
        cross = total - p_mf[i]
        res = ApcResult(initial=mfs[i])
        out.append(_iterate(F, s, s2[i], settings, p_mf[i], cross, res))
    return out


def estimate_noise_power(profile) -> float:
    """Noise power from the quietest decile of a matched-filter profile.

    For circular Gaussian noise the bin powers are exponential, whose lowest
    decile averages ``LOW_DECILE_MEAN`` times the true mean; the raw decile
    mean is divided by that factor.
    """
    p = profile.power if isinstance(profile, RangeProfile) else np.abs(np.asarray(profile)) ** 2
    n = p.size
    if n < 20:
        raise ValueError("need at least 20 bins")
    k = max(1, n // 10)
    low = np.partition(p, k - 1)[:k]
    return float(low.mean() / LOW_DECILE_MEAN)


# E[X | X < q10] / E[X] for X ~ Exp(1), q10 = -ln(0.9)
_q = -np.log(0.9)
LOW_DECILE_MEAN = float((1.0 - np.exp(-_q) * (1.0 + _q)) / 0.1)
