"""Closed-form recovery certificate computed from a concentration constant delta.

Given delta, the chain is

    eps      spectral-initialisation radius (relative to ||x||)
    dhat     local restricted-isometry constant on rank-1 PSD differences
    h1, h2   lifted-distance sandwich constants
    h        restricted strong convexity constant, (1 - dhat) h1^2
    c        local Lipschitz constant of the gradient
    r        certified contraction, (h / c)^2
    mu       optimal constant step h / c^2
    alpha', beta'   scale-free regularity constants 2/h and 2/mu

Everything here is scalar arithmetic on Python floats.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .errors import CertificateError
from .lifted_model import SamplingEnsemble
from .rng import derive_stream, random_unit_signal

DELTA_MAX = 0.5
STAR_TOL = 1e-9

CURVE_HEADER = (
    "delta", "epsilon", "delta_hat", "h1", "h2", "h", "c", "r", "mu",
    "alpha_prime", "beta_prime", "snr_min_db", "valid",
)


def _check_delta(delta: float, upper: float = DELTA_MAX) -> float:
    delta = float(delta)
    if not (0.0 <= delta < upper):
        raise CertificateError(f"delta must lie in [0, {upper}), got {delta}")
    return delta


def epsilon_from_delta(delta: float) -> float:
    delta = _check_delta(delta)
    root = math.sqrt(1.0 + delta / 2.0)
    eps2 = 1.0 + root - 2.0 * math.sqrt((1.0 - 2.0 * delta) * root)
    return math.sqrt(max(eps2, 0.0))


def delta_hat(delta: float, epsilon: float) -> float:
    """Local RIC; infinite once eps >= 1 (the lifted lower sandwich collapses)."""
    if epsilon >= 1.0:
        return math.inf
    return math.sqrt(2.0) * (2.0 + epsilon) / math.sqrt((1.0 - epsilon) * (2.0 - epsilon)) * delta


def _delta_hat_of(delta: float) -> float:
    return delta_hat(delta, epsilon_from_delta(delta))


def delta_star() -> float:
    """Root of dhat(delta) = 1, by bisection to absolute tolerance 1e-9."""
    lo, hi = 0.0, 0.3
    while hi - lo > STAR_TOL:
        mid = 0.5 * (lo + hi)
        if _delta_hat_of(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_DELTA_STAR = delta_star()


def effective_delta_noisy(delta: float, snr_linear: float) -> float:
    """delta + (2 + delta) / sqrt(SNR); ``snr_linear=inf`` is the noiseless limit."""
    delta = _check_delta(delta)
    snr_linear = float(snr_linear)
    if not snr_linear > 0.0:
        raise CertificateError(f"SNR must be positive, got {snr_linear}")
    if math.isinf(snr_linear):
        return delta
    return delta + (2.0 + delta) / math.sqrt(snr_linear)


def snr_min_db(delta: float) -> float:
    """Smallest SNR (dB, 20 log10 of the amplitude ratio) keeping delta~ inside the regime."""
    if delta >= _DELTA_STAR:
        return math.inf
    return 20.0 * math.log10((2.0 + delta) / (_DELTA_STAR - delta))


@dataclass(frozen=True)
class CertificateReport:
    delta: float
    epsilon: float
    delta_hat: float
    h1: float
    h2: float
    h: float
    c: float
    r: float
    mu: float
    alpha_prime: float
    beta_prime: float
    snr_min_db: float
    valid: bool
    # noisy reports only: the SNR and the effective constant that set epsilon
    snr_linear: Optional[float] = None
    delta_effective: Optional[float] = None

    def curve_row(self) -> tuple:
        return astuple(self)[: len(CURVE_HEADER)]

    @property
    def rate(self) -> float:
        """Certified per-iteration contraction of dist^2: 1 - 2 mu / alpha'."""
        return 1.0 - 2.0 * self.mu / self.alpha_prime


def certificate_chain(delta: float, snr_linear: Optional[float] = None) -> CertificateReport:
    """Full certificate for concentration constant ``delta``.

    With ``snr_linear`` the spectral radius eps is taken at the noise-inflated
    delta~ = delta + (2 + delta)/sqrt(SNR), while dhat and c keep the noise-free
    delta: they are properties of the sampling ensemble, which noise does not
    change.
    """
    delta = _check_delta(delta)
    d_eff = delta
    if snr_linear is not None:
        d_eff = effective_delta_noisy(delta, snr_linear)
    nan = math.nan
    if d_eff >= DELTA_MAX:
        return CertificateReport(
            delta, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, snr_min_db(delta), False,
            snr_linear, d_eff,
        )
    eps = epsilon_from_delta(d_eff)
    c = (1.0 + eps) * (2.0 + eps) * (2.0 + delta)
    h2 = 2.0 + eps
    if eps >= 1.0:
        return CertificateReport(
            delta, eps, math.inf, nan, h2, nan, c, nan, nan, nan, nan, snr_min_db(delta), False,
            snr_linear, d_eff,
        )
    dhat = delta_hat(delta, eps)
    h1_sq = (1.0 - eps) * (2.0 - eps)
    h = (1.0 - dhat) * h1_sq
    mu = h / c**2
    valid = d_eff <= _DELTA_STAR and dhat < 1.0
    return CertificateReport(
        delta=delta,
        epsilon=eps,
        delta_hat=dhat,
        h1=math.sqrt(h1_sq),
        h2=h2,
        h=h,
        c=c,
        r=(h / c) ** 2,
        mu=mu,
        alpha_prime=2.0 / h,
        beta_prime=2.0 / mu,
        snr_min_db=snr_min_db(delta),
        valid=valid,
        snr_linear=snr_linear,
        delta_effective=d_eff if snr_linear is not None else None,
    )


def curve(start: float, stop: float, points: int) -> list[CertificateReport]:
    if points < 2 or not start < stop:
        raise CertificateError("curve grid needs start < stop and at least 2 points")
    if start < 0.0 or stop > 0.49:
        raise CertificateError("curve grid must lie within [0, 0.49]")
    return [certificate_chain(d) for d in np.linspace(start, stop, points)]


class Feasibility(NamedTuple):
    feasible: bool
    alpha_upper: float
    alpha_lower_inverse_gap: float


def snr_feasibility(delta: float, snr_linear: float) -> Feasibility:
    """Two-sided alpha condition under additive noise.

    ``alpha_upper`` bounds alpha ||x||^2 so the noisy iterates stay in the
    initial neighbourhood; a finite beta exists iff its reciprocal is below
    (1 - dhat)(1 - eps)(2 - eps). The gap is that right side minus
    1/alpha_upper; feasible iff it is positive.
    """
    delta = _check_delta(delta, upper=_DELTA_STAR + STAR_TOL)
    d_eff = effective_delta_noisy(delta, snr_linear)
    if d_eff >= DELTA_MAX:
        return Feasibility(False, math.nan, -math.inf)
    eps = epsilon_from_delta(d_eff)
    if eps >= 1.0:
        return Feasibility(False, math.nan, -math.inf)
    rhs = (1.0 - delta_hat(delta, eps)) * (1.0 - eps) * (2.0 - eps)
    if math.isinf(snr_linear):
        return Feasibility(rhs > 0.0, math.inf, rhs)
    alpha_upper = eps * math.sqrt(snr_linear) / ((1.0 + eps) * (2.0 + delta))
    gap = rhs - 1.0 / alpha_upper
    return Feasibility(gap > 0.0, alpha_upper, gap)


# --- empirical delta --------------------------------------------------------------


class DeltaEstimate(NamedTuple):
    delta_estimate: float
    witness: np.ndarray


def fourth_moment_gap(ensemble: SamplingEnsemble, x: np.ndarray) -> float:
    """g(x) = |(1/M) sum |a_m^H x|^4 - 2| for unit x."""
    return abs(float(np.mean(np.abs(ensemble.analysis(x)) ** 4)) - 2.0)


def _ascend(ensemble: SamplingEnsemble, x: np.ndarray, iterations: int) -> tuple[float, np.ndarray]:
    # Riemannian ascent of g^2 on the unit sphere; the step starts at 0.05 and is
    # halved whenever a trial point fails to increase g^2.
    step = 0.05
    ax = ensemble.analysis(x)
    s = float(np.mean(np.abs(ax) ** 4)) - 2.0
    for _ in range(iterations):
        # d/dx of (s^2) in the real sense: 2 s * (4/M) sum |a^H x|^2 a (a^H x)
        grad = 2.0 * s * (4.0 / ensemble.m) * ensemble.synthesis(np.abs(ax) ** 2 * ax)
        grad = grad - np.real(np.vdot(x, grad)) * x
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        while step > 1e-12:
            cand = x + (step / gnorm) * grad
            cand = cand / np.linalg.norm(cand)
            acand = ensemble.analysis(cand)
            scand = float(np.mean(np.abs(acand) ** 4)) - 2.0
            if scand * scand > s * s:
                x, ax, s = cand, acand, scand
                break
            step *= 0.5
        else:
            break
    return abs(s), x


def estimate_delta(
    ensemble: SamplingEnsemble, restarts: int = 64, iterations: int = 200, seed: int = 0
) -> DeltaEstimate:
    """Lower bound on the uniform concentration constant of ``ensemble``.

    Maximises g(x) over the unit sphere by multistart ascent. Restart ``i``
    starts from stream ``(seed, i)``, so adding restarts never lowers the
    estimate. The true uniform constant can only be larger.
    """
    if restarts < 1 or iterations < 1:
        raise ValueError("restarts and iterations must be positive")
    best, witness = -1.0, None
    for i in range(restarts):
        x0 = random_unit_signal(derive_stream(seed, i).generator(), ensemble.n)
        val, x = _ascend(ensemble, x0, iterations)
        if val > best:
            best, witness = val, x
    # report the value recomputed at the witness so g(witness) == estimate exactly
    return DeltaEstimate(fourth_moment_gap(ensemble, witness), witness)


def report_fields() -> list[str]:
    return [f.name for f in fields(CertificateReport)]
