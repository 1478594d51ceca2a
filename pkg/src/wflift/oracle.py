"""Executable versions of the inequality chain behind the certificate.

Each ``check_*`` evaluates one inequality at a concrete (z, x) and returns a
:class:`CheckResult` whose margin is positive when the inequality holds.
Points are drawn from the neighbourhood E(eps) = {z : dist(z, x) <= eps ||x||}
by :func:`sample_neighbourhood`, which guarantees membership by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, NamedTuple, Optional

import numpy as np

from .certificates import CertificateReport, delta_hat, fourth_moment_gap
from .errors import CertificateError
from .io import write_csv, write_ensemble, write_signal
from .lifted_model import SamplingEnsemble, as_signal, forward_intensity
from .rng import complex_normal, derive_stream, random_unit_signal
from .solver import distance, gradient, objective, phase_align

MARGIN_TOL = 1e-9
# slack, in units of ||x||, on dist <= eps ||x|| when testing membership; the
# sampler can land on the boundary and the distance is only accurate to rounding
MEMBERSHIP_TOL = 1e-12

CHECK_HEADER = ("name", "holds", "lhs", "rhs", "margin")

Direction = Literal["shrink", "grow", "phase", "orthogonal", "random"]
DIRECTIONS: tuple[Direction, ...] = ("shrink", "grow", "phase", "orthogonal", "random")


@dataclass(frozen=True)
class CheckResult:
    """One evaluated inequality ``lhs <= rhs`` or ``lhs >= rhs``.

    ``margin`` is the signed slack, positive when the inequality holds.
    """

    name: str
    holds: bool
    lhs: float
    rhs: float
    margin: float
    witness: dict

    def row(self) -> tuple:
        return (self.name, self.holds, self.lhs, self.rhs, self.margin)


def _result(name: str, lhs: float, sense: str, rhs: float, **witness) -> CheckResult:
    margin = rhs - lhs if sense == "<=" else lhs - rhs
    return CheckResult(name, bool(margin >= -MARGIN_TOL), lhs, rhs, margin, witness)


def _require_membership(z, x, epsilon: float) -> float:
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    d = distance(z, x)
    nx = float(np.linalg.norm(x))
    radius = epsilon * nx
    if d > radius + MEMBERSHIP_TOL * nx:
        raise ValueError(f"z is outside E({epsilon}): dist = {d:.6g} > {radius:.6g}")
    return d


# --- sampling E(eps) -------------------------------------------------------------


def sample_neighbourhood(
    x,
    epsilon: float,
    rng: np.random.Generator,
    direction: Direction = "random",
    radius: Literal["boundary", "uniform"] = "uniform",
) -> np.ndarray:
    """z = e^{j psi} (x + t u) with ||u|| = 1 and 0 <= t <= eps ||x||.

    Since dist(z, x) <= ||t u|| = t, membership holds by construction. The
    directions relative to x_hat = x/||x|| are: ``shrink`` -x_hat, ``grow``
    +x_hat, ``phase`` j x_hat, ``orthogonal`` a random unit vector orthogonal
    to x, ``random`` a uniformly random unit vector.
    """
    x = as_signal(x, name="x")
    nx = float(np.linalg.norm(x))
    xh = x / nx
    if direction == "shrink":
        u = -xh
    elif direction == "grow":
        u = xh
    elif direction == "phase":
        u = 1j * xh
    elif direction == "orthogonal":
        if x.size == 1:
            u = 1j * xh
        else:
            w = complex_normal(rng, x.size)
            w = w - np.vdot(xh, w) * xh
            u = w / np.linalg.norm(w)
    elif direction == "random":
        u = random_unit_signal(rng, x.size)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    t = epsilon * nx * (1.0 if radius == "boundary" else float(rng.uniform()))
    psi = float(rng.uniform(0.0, 2.0 * math.pi))
    return np.exp(1j * psi) * (x + t * u)


# --- geometric and ensemble checks ---------------------------------------------------


def _lifted_diff(z, x) -> np.ndarray:
    return np.outer(z, z.conj()) - np.outer(x, x.conj())


def check_lemma3(z, x, epsilon: float) -> tuple[CheckResult, CheckResult]:
    """h1 dist ||x|| <= ||zz^H - xx^H||_F <= h2 dist ||x|| on E(eps)."""
    z = as_signal(z, name="z")
    x = as_signal(x, z.size, "x")
    d = _require_membership(z, x, epsilon)
    nx = float(np.linalg.norm(x))
    fro = float(np.linalg.norm(_lifted_diff(z, x)))
    h1 = math.sqrt((1.0 - epsilon) * (2.0 - epsilon))
    h2 = 2.0 + epsilon
    return (
        _result("lemma3_lower", h1 * d * nx, "<=", fro, epsilon=epsilon, dist=d),
        _result("lemma3_upper", fro, "<=", h2 * d * nx, epsilon=epsilon, dist=d),
    )


def check_rip(
    ensemble: SamplingEnsemble, z, x, delta: float, epsilon: float
) -> tuple[CheckResult, CheckResult]:
    """(1 - dhat) ||H||_F^2 <= (1/M) ||A(H)||^2 <= (2 + dhat) ||H||_F^2 for
    H = zz^H - xx^H, with dhat computed from (delta, eps)."""
    z = as_signal(z, ensemble.n, "z")
    x = as_signal(x, ensemble.n, "x")
    _require_membership(z, x, epsilon)
    dh = delta_hat(delta, epsilon)
    h = _lifted_diff(z, x)
    fro2 = float(np.linalg.norm(h) ** 2)
    # A(zz^H - xx^H) evaluated per row as |a^H z|^2 - |a^H x|^2
    lifted = forward_intensity(ensemble, z) - forward_intensity(ensemble, x)
    energy = float(np.dot(lifted, lifted) / ensemble.m)
    return (
        _result("rip_lower", (1.0 - dh) * fro2, "<=", energy, delta=delta, epsilon=epsilon),
        _result("rip_upper", energy, "<=", (2.0 + dh) * fro2, delta=delta, epsilon=epsilon),
    )


def check_lipschitz(ensemble: SamplingEnsemble, z, x, delta: float, epsilon: float) -> CheckResult:
    """||grad f(z)|| <= c dist(z, x) ||x||^2 with c = (1+eps)(2+eps)(2+delta)."""
    z = as_signal(z, ensemble.n, "z")
    x = as_signal(x, ensemble.n, "x")
    d = _require_membership(z, x, epsilon)
    y = forward_intensity(ensemble, x)
    g = float(np.linalg.norm(gradient(ensemble, y, z)))
    c = (1.0 + epsilon) * (2.0 + epsilon) * (2.0 + delta)
    return _result("lipschitz", g, "<=", c * d * float(np.vdot(x, x).real), delta=delta, epsilon=epsilon)


def check_strong_convexity(
    ensemble: SamplingEnsemble, z, x, delta: float, epsilon: float
) -> CheckResult:
    """f(z) >= ((1 - dhat) h1^2 / 2) dist^2 ||x||^2."""
    z = as_signal(z, ensemble.n, "z")
    x = as_signal(x, ensemble.n, "x")
    d = _require_membership(z, x, epsilon)
    y = forward_intensity(ensemble, x)
    h = (1.0 - delta_hat(delta, epsilon)) * (1.0 - epsilon) * (2.0 - epsilon)
    return _result(
        "strong_convexity",
        objective(ensemble, y, z),
        ">=",
        0.5 * h * d * d * float(np.vdot(x, x).real),
        delta=delta,
        epsilon=epsilon,
    )


def check_regularity(
    ensemble: SamplingEnsemble,
    y,
    z,
    x,
    report: CertificateReport,
    epsilon: Optional[float] = None,
) -> CheckResult:
    """Re<grad f(z), z - x e^{j Phi(z)}> >= dist^2 / alpha + ||grad f||^2 / beta
    with alpha = alpha'/||x||^2 and beta = beta' ||x||^2.

    The neighbourhood radius defaults to the report's eps; ``epsilon`` widens
    it for falsification runs.
    """
    if not report.valid:
        raise CertificateError("regularity check needs a valid certificate")
    z = as_signal(z, ensemble.n, "z")
    x = as_signal(x, ensemble.n, "x")
    eps = report.epsilon if epsilon is None else epsilon
    d = _require_membership(z, x, eps)
    nx2 = float(np.vdot(x, x).real)
    g = gradient(ensemble, y, z)
    aligned = phase_align(z, x).aligned_truth
    lhs = float(np.real(np.vdot(g, z - aligned)))
    rhs = d * d * nx2 / report.alpha_prime + float(np.vdot(g, g).real) / (report.beta_prime * nx2)
    return _result("regularity", lhs, ">=", rhs, delta=report.delta, epsilon=eps)


# --- falsification ------------------------------------------------------------------


class Counterexample(NamedTuple):
    result: CheckResult
    z: np.ndarray
    x: np.ndarray


def falsify_regularity(
    ensemble: SamplingEnsemble,
    report: CertificateReport,
    samples: int,
    seed: int = 0,
    epsilon: Optional[float] = None,
    out_dir=None,
) -> list[Counterexample]:
    """Random search for violations of the regularity inequality.

    Sample ``i`` uses stream ``(seed, i)`` for its truth and its point in
    E(eps), cycling through the sampler directions with boundary radius on
    even samples. With ``out_dir`` each violation is written as
    ``cex_<i>_z.txt``, ``cex_<i>_x.txt`` and ``cex_<i>.csv`` next to a single
    ``ensemble.txt``.
    """
    eps = report.epsilon if epsilon is None else epsilon
    found = []
    for i in range(samples):
        rng = derive_stream(seed, i).generator()
        x = random_unit_signal(rng, ensemble.n)
        z = sample_neighbourhood(
            x, eps, rng, DIRECTIONS[i % len(DIRECTIONS)], "boundary" if i % 2 == 0 else "uniform"
        )
        res = check_regularity(ensemble, forward_intensity(ensemble, x), z, x, report, eps)
        if not res.holds:
            found.append(Counterexample(res, z, x))
            if out_dir is not None:
                out = Path(out_dir)
                out.mkdir(parents=True, exist_ok=True)
                if not (out / "ensemble.txt").exists():
                    write_ensemble(ensemble, out / "ensemble.txt")
                write_signal(z, out / f"cex_{i}_z.txt")
                write_signal(x, out / f"cex_{i}_x.txt")
                write_csv(CHECK_HEADER, [res.row()], out / f"cex_{i}.csv")
    return found


# --- uniformity --------------------------------------------------------------------

PROBE_CHUNK = 1024
PROBE_QUANTILES = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class ProbeResult:
    samples: int
    max: float
    mean: float
    quantiles: dict
    counts: np.ndarray
    edges: np.ndarray
    argmax: np.ndarray


def uniformity_probe(
    ensemble: SamplingEnsemble, samples: int, seed: int = 0, bins: int = 20
) -> ProbeResult:
    """Distribution of g(x) = |(1/M) sum |a^H x|^4 - 2| over random unit x.

    Draws come in blocks of 1024 from streams ``(seed, block)``, so the first
    ``s`` samples are the same whatever the total requested.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    vals = np.empty(samples)
    best = None
    for start in range(0, samples, PROBE_CHUNK):
        count = min(PROBE_CHUNK, samples - start)
        block = complex_normal(derive_stream(seed, start // PROBE_CHUNK).generator(), (PROBE_CHUNK, ensemble.n))
        block = block[:count]
        block /= np.linalg.norm(block, axis=1, keepdims=True)
        inner = block.conj() @ ensemble.vectors.T  # (count, M): conj(x)^T a_m, same modulus
        vals[start:start + count] = np.abs(np.mean(np.abs(inner) ** 4, axis=1) - 2.0)
        j = int(np.argmax(vals[start:start + count]))
        if best is None or vals[start + j] > vals[best[0]]:
            best = (start + j, block[j].copy())
    top = float(vals.max())
    counts, edges = np.histogram(vals, bins=bins, range=(0.0, top if top > 0 else 1.0))
    return ProbeResult(
        samples=samples,
        max=top,
        mean=float(vals.mean()),
        quantiles={q: float(np.quantile(vals, q)) for q in PROBE_QUANTILES},
        counts=counts,
        edges=edges,
        argmax=best[1],
    )


def probe_consistency(ensemble: SamplingEnsemble, probe: ProbeResult) -> float:
    """g at the probe's argmax recomputed through the ascent's objective."""
    return fourth_moment_gap(ensemble, probe.argmax)
