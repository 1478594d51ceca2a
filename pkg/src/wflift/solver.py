"""Wirtinger Flow: spectral initialisation followed by gradient descent on

    f(z) = (1/2M) sum_m (y_m - |a_m^H z|^2)^2.

Gradient convention: ``gradient`` returns the conjugate cogradient
(1/M) sum_m (|a_m^H z|^2 - y_m) a_m a_m^H z, so a first-order change of f
along a complex direction d is 2 Re<grad f(z), d>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Optional, Union

import numpy as np

from .certificates import CertificateReport, certificate_chain
from .errors import CertificateError, DimensionError, DivergenceError
from .lifted_model import (
    SamplingEnsemble,
    SpectralEstimate,
    as_signal,
    leading_eigenpair,
    spectral_matrix,
)

TRACE_HEADER = ("k", "objective", "dist", "step")

# distances below this multiple of ||x|| are at the rounding floor and say
# nothing about the contraction rate
RATE_FLOOR = 1e-10
RATE_WINDOW = 50


# --- step policies ---------------------------------------------------------------


@dataclass(frozen=True)
class Certified:
    """Constant step mu(delta) = h / c^2 from the certificate of ``delta``."""

    delta: float


@dataclass(frozen=True)
class Fixed:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"fixed step must be positive, got {self.mu}")


@dataclass(frozen=True)
class HeuristicRamp:
    """mu_k = min(1 - exp(-k / tau), mu_max)."""

    mu_max: float = 0.2
    tau: float = 330.0

    def __post_init__(self):
        if not self.mu_max > 0 or not self.tau > 0:
            raise ValueError("ramp needs mu_max > 0 and tau > 0")


StepMode = Union[Certified, Fixed, HeuristicRamp]


@dataclass(frozen=True)
class SolveOptions:
    step_mode: StepMode = field(default_factory=HeuristicRamp)
    max_iterations: int = 5000
    stop_tolerance: float = 1e-10
    power_iter_tolerance: float = 1e-10
    power_iter_cap: int = 5000
    # "z0" divides the step by ||z0||^2; "truth" by ||x||^2 (needs the truth)
    normalize_by: Literal["z0", "truth"] = "z0"

    def __post_init__(self):
        if self.max_iterations < 1 or self.power_iter_cap < 1:
            raise ValueError("iteration caps must be positive")
        if not (self.stop_tolerance > 0 and self.power_iter_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.normalize_by not in ("z0", "truth"):
            raise ValueError(f"normalize_by must be 'z0' or 'truth', got {self.normalize_by!r}")


@dataclass(frozen=True)
class SolveTrace:
    """Row ``k`` holds f(z_k), dist(z_k, x) (NaN without truth) and the
    dimensionless step mu_k taken from z_k; the terminal row has step 0."""

    k: np.ndarray
    objective: np.ndarray
    dist: np.ndarray
    step: np.ndarray
    final_estimate: np.ndarray
    converged: bool
    empirical_rate: Optional[float]
    z0: np.ndarray
    certificate: Optional[CertificateReport] = None

    @property
    def iterations(self) -> int:
        return int(self.k[-1])

    def rows(self):
        return zip(self.k.tolist(), self.objective.tolist(), self.dist.tolist(), self.step.tolist())


# --- geometry ------------------------------------------------------------------


def _pair(z, x) -> tuple[np.ndarray, np.ndarray]:
    z = as_signal(z, name="z")
    x = as_signal(x, name="x")
    if z.size != x.size:
        raise DimensionError(f"signals have lengths {z.size} and {x.size}")
    return z, x


class PhaseAlignment(NamedTuple):
    phi: float
    aligned_truth: np.ndarray
    degenerate: bool


def phase_align(z, x) -> PhaseAlignment:
    """Angle phi in [0, 2 pi) minimising ||z - x e^{j phi}||.

    When <x, z> = 0 every angle is optimal; phi = 0 is returned with
    ``degenerate`` set.
    """
    z, x = _pair(z, x)
    inner = np.vdot(x, z)
    if inner == 0:
        return PhaseAlignment(0.0, x.copy(), True)
    phi = float(np.angle(inner)) % (2.0 * math.pi)
    return PhaseAlignment(phi, x * np.exp(1j * phi), False)


def distance(z, x) -> float:
    """min over phi of ||z - x e^{j phi}||.

    Evaluated as the norm of the aligned residual instead of the closed form
    sqrt(||z||^2 + ||x||^2 - 2|<z, x>|); the two agree exactly in real
    arithmetic but the closed form cancels catastrophically near the solution
    set and floors at about 1e-8 ||x||.
    """
    z, x = _pair(z, x)
    inner = np.vdot(x, z)
    if inner == 0:
        return float(math.sqrt(np.vdot(z, z).real + np.vdot(x, x).real))
    return float(np.linalg.norm(z - x * (inner / abs(inner))))


# --- loss ------------------------------------------------------------------------


def _check_y(ensemble: SamplingEnsemble, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (ensemble.m,):
        raise DimensionError(f"intensities have shape {y.shape}, expected ({ensemble.m},)")
    return y


def objective(ensemble: SamplingEnsemble, y, z) -> float:
    y = _check_y(ensemble, y)
    z = as_signal(z, ensemble.n, "z")
    r = y - np.abs(ensemble.analysis(z)) ** 2
    return float(np.dot(r, r) / (2 * ensemble.m))


def gradient(ensemble: SamplingEnsemble, y, z) -> np.ndarray:
    y = _check_y(ensemble, y)
    z = as_signal(z, ensemble.n, "z")
    az = ensemble.analysis(z)
    return ensemble.synthesis((np.abs(az) ** 2 - y) * az) / ensemble.m


# --- initialisation --------------------------------------------------------------


def spectral_initialize(
    ensemble: SamplingEnsemble, y, opts: Optional[SolveOptions] = None
) -> tuple[np.ndarray, SpectralEstimate]:
    """z0 = sqrt(lambda0) v0 with lambda0 = ||y|| / sqrt(2M) and v0 the
    leading eigenvector of Y = (1/M) sum y_m a_m a_m^H."""
    opts = opts or SolveOptions()
    y = _check_y(ensemble, y)
    if not np.any(y):
        raise ValueError("spectral initialisation needs at least one non-zero intensity")
    est = spectral_matrix(ensemble, y)
    # Y is PSD for non-negative intensities; noisy y needs the shifted iteration
    rho, v = leading_eigenpair(
        est.matrix, opts.power_iter_tolerance, opts.power_iter_cap, psd=bool(np.all(y >= 0))
    )
    lam0 = float(np.linalg.norm(y) / math.sqrt(2 * ensemble.m))
    est = SpectralEstimate(est.matrix, rho, v, lam0)
    return math.sqrt(lam0) * v, est


# --- main loop -------------------------------------------------------------------


def _step_schedule(mode: StepMode):
    if isinstance(mode, Certified):
        report = certificate_chain(mode.delta)
        if not report.valid:
            raise CertificateError(
                f"delta = {mode.delta} is outside the certified regime; no certified step exists"
            )
        return (lambda k: report.mu), report
    if isinstance(mode, Fixed):
        return (lambda k: mode.mu), None
    if isinstance(mode, HeuristicRamp):
        return (lambda k: min(1.0 - math.exp(-k / mode.tau), mode.mu_max)), None
    raise TypeError(f"unknown step mode {mode!r}")


def solve(
    ensemble: SamplingEnsemble,
    y,
    opts: Optional[SolveOptions] = None,
    truth=None,
    init=None,
) -> SolveTrace:
    """Wirtinger Flow from the spectral estimate (or from ``init`` if given).

    Stops once dist(z_k, x) <= stop_tolerance ||x|| when the truth is known,
    otherwise once f(z_k) <= stop_tolerance f(z_0), or at the iteration cap.
    """
    opts = opts or SolveOptions()
    y = _check_y(ensemble, y)
    if truth is not None:
        truth = as_signal(truth, ensemble.n, "truth")
    step_of, report = _step_schedule(opts.step_mode)

    if init is not None:
        z = as_signal(init, ensemble.n, "init").copy()
    elif not np.any(y):
        z = np.zeros(ensemble.n, dtype=complex)
    else:
        z, _ = spectral_initialize(ensemble, y, opts)
    z0 = z.copy()

    if opts.normalize_by == "truth":
        if truth is None:
            raise ValueError("normalize_by='truth' needs the truth signal")
        norm2 = float(np.vdot(truth, truth).real)
    else:
        norm2 = float(np.vdot(z0, z0).real)

    x_norm = float(np.linalg.norm(truth)) if truth is not None else None

    ks, objs, dists, steps = [], [], [], []
    converged = False
    f0 = None
    for k in range(opts.max_iterations + 1):
        az = ensemble.analysis(z)
        resid = np.abs(az) ** 2 - y
        f = float(np.dot(resid, resid) / (2 * ensemble.m))
        d = distance(z, truth) if truth is not None else math.nan
        if not (math.isfinite(f) and np.all(np.isfinite(z))):
            raise DivergenceError(f"iterate became non-finite at iteration {k}", iteration=k)
        if f0 is None:
            f0 = f
        ks.append(k)
        objs.append(f)
        dists.append(d)
        if truth is not None:
            done = d <= opts.stop_tolerance * x_norm if x_norm > 0 else d == 0.0
        else:
            done = f <= opts.stop_tolerance * f0
        if done or norm2 == 0.0:
            converged = True
            steps.append(0.0)
            break
        if k == opts.max_iterations:
            steps.append(0.0)
            break
        mu = step_of(k)
        steps.append(mu)
        z = z - (mu / norm2) * (ensemble.synthesis(resid * az) / ensemble.m)

    k_arr = np.array(ks, dtype=int)
    d_arr = np.array(dists)
    rate = None
    if truth is not None and x_norm > 0:
        keep = np.flatnonzero(d_arr > RATE_FLOOR * x_norm)
        if keep.size >= 3:
            sub = keep[-(min(RATE_WINDOW, keep.size - 1) + 1):]
            rate = _fit(k_arr[sub], d_arr[sub])
    return SolveTrace(
        k=k_arr,
        objective=np.array(objs),
        dist=d_arr,
        step=np.array(steps),
        final_estimate=z,
        converged=converged,
        empirical_rate=rate,
        z0=z0,
        certificate=report,
    )


def _fit(k: np.ndarray, dist: np.ndarray) -> float:
    if np.any(dist == 0.0):
        return 0.0
    slope = np.polyfit(k.astype(float), np.log(dist**2), 1)[0]
    return float(math.exp(slope))


def fit_rate(trace: SolveTrace, window: int) -> float:
    """Per-iteration contraction of dist^2, exp of the least-squares slope of
    log dist^2(z_k, x) over the last ``window`` steps. Returns 0 if a distance
    in the window is exactly zero."""
    if window < 1:
        raise ValueError("window must be positive")
    dist = np.asarray(trace.dist, dtype=float)
    if dist.size < window + 1:
        raise ValueError(f"trace has {dist.size} rows, need at least {window + 1}")
    tail = dist[-(window + 1):]
    if np.any(np.isnan(tail)):
        raise ValueError("trace has no distance-to-truth column")
    return _fit(np.asarray(trace.k)[-(window + 1):], tail)
