"""Additive intensity noise at a target SNR, with the bounds that describe
how the spectral matrix and the final Wirtinger Flow error degrade.

SNR is ||A(xx^H)||^2 / ||eta||^2 throughout; dB values use 10 log10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Sequence, Union

import numpy as np

from .certificates import CertificateReport, certificate_chain, estimate_delta, snr_feasibility
from .errors import CertificateError
from .lifted_model import SamplingEnsemble, as_signal, forward_intensity, hermitian_spectral_norm, spectral_matrix
from .rng import RngStream, derive_stream, random_unit_signal
from .solver import SolveOptions, solve

ENVELOPE_SLACK = 3.0
NOISY_HEADER = (
    "snr_db", "trials", "mean_rel_dist", "median_rel_dist", "envelope_asymptote", "slope_fit",
)

Distribution = Literal["gaussian_real", "uniform_real"]
SeedLike = Union[int, RngStream]


def snr_db_to_linear(snr_db: float) -> float:
    return math.inf if math.isinf(snr_db) and snr_db > 0 else 10.0 ** (snr_db / 10.0)


def _generator(seed: SeedLike) -> np.random.Generator:
    stream = seed if isinstance(seed, RngStream) else derive_stream(seed, 0)
    return stream.generator()


@dataclass(frozen=True)
class NoiseSpec:
    snr_db_target: float
    realized_snr_linear: float
    seed: SeedLike
    distribution_tag: Distribution


def add_noise(
    y_clean, snr_db: float, distribution_tag: Distribution = "gaussian_real", seed: SeedLike = 0
) -> tuple[np.ndarray, NoiseSpec]:
    """y_clean + eta with eta i.i.d. zero-mean, rescaled so that
    ||y_clean||^2 / ||eta||^2 equals the target exactly."""
    y_clean = np.asarray(y_clean, dtype=float)
    norm_y = float(np.linalg.norm(y_clean))
    if norm_y == 0.0:
        raise ValueError("cannot set an SNR for an all-zero clean signal")
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"SNR target must be finite or +inf, got {snr_db}")
    if distribution_tag not in ("gaussian_real", "uniform_real"):
        raise ValueError(f"unknown noise distribution {distribution_tag!r}")
    if math.isinf(snr_db):
        return y_clean.copy(), NoiseSpec(snr_db, math.inf, seed, distribution_tag)
    rng = _generator(seed)
    if distribution_tag == "gaussian_real":
        eta = rng.standard_normal(y_clean.shape)
    else:
        # unit variance, like the Gaussian draw
        eta = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), y_clean.shape)
    target = snr_db_to_linear(snr_db)
    eta *= norm_y / (math.sqrt(target) * np.linalg.norm(eta))
    realized = norm_y**2 / float(np.dot(eta, eta))
    return y_clean + eta, NoiseSpec(snr_db, realized, seed, distribution_tag)


class Lemma6Check(NamedTuple):
    empirical_mean: float
    bound: float
    holds: bool
    standard_error: float


def lemma6_bound(delta: float, snr_linear: float, x_norm2: float) -> float:
    if math.isinf(snr_linear):
        return delta * x_norm2
    return (delta + (2.0 + delta) / math.sqrt(snr_linear)) * x_norm2


def lemma6_bound_check(
    ensemble: SamplingEnsemble,
    x,
    snr_db: float,
    trials: int,
    seed: int = 0,
    delta: Optional[float] = None,
    distribution_tag: Distribution = "gaussian_real",
) -> Lemma6Check:
    """Monte Carlo mean of ||Y - (xx^H + ||x||^2 I)|| over noise draws, against
    (delta + (2 + delta)/sqrt(SNR)) ||x||^2.

    Without ``delta`` the ensemble's constant is estimated, which gives a lower
    bound and so a bound that is easier to violate.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    x = as_signal(x, ensemble.n, "x")
    nx2 = float(np.vdot(x, x).real)
    if nx2 == 0.0:
        raise ValueError("x must be non-zero")
    if delta is None:
        delta = estimate_delta(ensemble, seed=seed).delta_estimate
    y = forward_intensity(ensemble, x)
    target = np.outer(x, x.conj()) + nx2 * np.eye(ensemble.n)
    draws = 1 if math.isinf(snr_db) else trials
    vals = np.empty(draws)
    for t in range(draws):
        y_noisy, _ = add_noise(y, snr_db, distribution_tag, derive_stream(seed, t))
        vals[t] = hermitian_spectral_norm(spectral_matrix(ensemble, y_noisy).matrix - target)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    bound = lemma6_bound(delta, snr_db_to_linear(snr_db), nx2)
    return Lemma6Check(mean, bound, mean <= bound, se)


def theorem2_envelope(
    delta: float, snr_db: float, k, report: Optional[CertificateReport] = None
) -> float:
    """eps (1 - 2 mu / alpha')^{k/2} + alpha' (2 + delta) / sqrt(SNR), relative to ||x||.

    ``report`` defaults to the noisy certificate of (delta, SNR); ``k`` may be
    ``math.inf`` for the asymptote. Raises CertificateError for pairs where no
    finite beta exists.
    """
    snr = snr_db_to_linear(snr_db)
    feas = snr_feasibility(delta, snr)
    if not feas.feasible:
        raise CertificateError(f"(delta={delta}, SNR={snr_db} dB) is infeasible")
    if report is None:
        report = certificate_chain(delta, None if math.isinf(snr) else snr)
    floor = 0.0 if math.isinf(snr) else report.alpha_prime * (2.0 + delta) / math.sqrt(snr)
    if math.isinf(k):
        return floor
    return report.epsilon * report.rate ** (k / 2.0) + floor


# --- experiment ------------------------------------------------------------------


@dataclass(frozen=True)
class NoisyRow:
    snr_db: float
    trials: int
    mean_rel_dist: float
    median_rel_dist: float
    envelope_asymptote: float
    slope_fit: float

    def as_tuple(self) -> tuple:
        return (self.snr_db, self.trials, self.mean_rel_dist, self.median_rel_dist,
                self.envelope_asymptote, self.slope_fit)


def noisy_experiment(
    ensemble: SamplingEnsemble,
    snr_db: Sequence[float],
    trials: int,
    opts: SolveOptions,
    seed: int = 0,
    delta: float = 0.0,
    distribution_tag: Distribution = "gaussian_real",
) -> list[NoisyRow]:
    """Noisy solves over an SNR ladder.

    Trial ``t`` draws its unit truth and its noise direction from stream
    ``(seed, t)``, and reuses both at every SNR level, so levels differ only in
    the noise scale. ``slope_fit`` is the least-squares slope of log mean error
    against log(1/sqrt(SNR)) over the finite levels (NaN with fewer than two).
    ``delta`` is the ensemble constant used for the asymptote.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    levels = [float(s) for s in snr_db]
    if not levels:
        raise ValueError("need at least one SNR level")
    errs = np.empty((len(levels), trials))
    for t in range(trials):
        stream = derive_stream(seed, t)
        x = random_unit_signal(stream.child(0).generator(), ensemble.n)
        y = forward_intensity(ensemble, x)
        for i, level in enumerate(levels):
            y_noisy, _ = add_noise(y, level, distribution_tag, stream.child(1))
            trace = solve(ensemble, y_noisy, opts, truth=x)
            errs[i, t] = trace.dist[-1]
    means = errs.mean(axis=1)
    finite = [i for i, s in enumerate(levels) if math.isfinite(s)]
    slope = math.nan
    if len(finite) >= 2 and np.all(means[finite] > 0):
        u = np.log([10.0 ** (-levels[i] / 20.0) for i in finite])
        slope = float(np.polyfit(u, np.log(means[finite]), 1)[0])
    rows = []
    for i, level in enumerate(levels):
        try:
            asym = theorem2_envelope(delta, level, math.inf)
        except CertificateError:
            asym = math.nan
        rows.append(
            NoisyRow(level, trials, float(means[i]), float(np.median(errs[i])), asym, slope)
        )
    return rows
