"""Sampling ensembles and the lifted forward model.

Signals are plain 1-D complex numpy arrays. An ensemble stores its sampling
vectors densely as the rows of an ``(M, N)`` array, so that

    y_m = |<a_m, z>|^2 = |a_m^H z|^2,

and the lifted map acts on Hermitian ``H`` as ``A(H)_m = a_m^H H a_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .errors import DimensionError, PowerIterationError
from .rng import complex_normal, derive_stream

HERMITIAN_TOL = 1e-10
DENSE_EIG_MAX_N = 64


def as_signal(z, n: Optional[int] = None, name: str = "signal") -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim != 1 or z.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} has non-finite entries")
    if n is not None and z.size != n:
        raise DimensionError(f"{name} has length {z.size}, expected {n}")
    return z


@dataclass(frozen=True)
class SamplingEnsemble:
    vectors: np.ndarray
    model_tag: Literal["gaussian", "file"] = "file"
    seed: Optional[int] = None
    _conj: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.vectors, dtype=complex)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"ensemble must be an (M, N) array with M, N >= 1, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("ensemble has non-finite entries")
        if self.model_tag not in ("gaussian", "file"):
            raise ValueError(f"unknown model_tag {self.model_tag!r}")
        if (self.model_tag == "gaussian") != (self.seed is not None):
            raise ValueError("seed is required for, and only for, gaussian ensembles")
        a.setflags(write=False)
        object.__setattr__(self, "vectors", a)
        conj = a.conj()
        conj.setflags(write=False)
        object.__setattr__(self, "_conj", conj)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def analysis(self, z: np.ndarray) -> np.ndarray:
        """The M inner products a_m^H z."""
        return self._conj @ z

    def synthesis(self, c: np.ndarray) -> np.ndarray:
        """sum_m c_m a_m."""
        return self.vectors.T @ c


def generate_gaussian_ensemble(n: int, m: int, seed: int) -> SamplingEnsemble:
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    rng = derive_stream(seed, 0).generator()
    return SamplingEnsemble(complex_normal(rng, (m, n)), model_tag="gaussian", seed=int(seed))


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p**0.5) + 1))


def projective_design(n: int, perturbation: float = 0.0, seed: int = 0) -> SamplingEnsemble:
    """Ensemble with an exactly vanishing perturbation operator.

    The N + 1 mutually unbiased bases of C^N (N prime) form a complex projective
    2-design. Scaling each unit vector by (N(N+1))^{1/4} gives

        (1/M) sum_m |a_m^H x|^2 a_m a_m^H = x x^H + ||x||^2 I   for every x,

    so the concentration constant is zero. ``perturbation > 0`` adds i.i.d.
    complex normal noise of that relative size per entry, producing a small
    non-zero constant. The result is tagged ``file``: such ensembles are meant
    to be exported and reloaded, not regenerated from a seed.
    """
    if n == 1:
        rows = np.ones((1, 1), dtype=complex)
    elif n == 2:
        s = 1 / np.sqrt(2)
        rows = np.array(
            [[1, 0], [0, 1], [s, s], [s, -s], [s, 1j * s], [s, -1j * s]], dtype=complex
        )
    elif _is_prime(n):
        j = np.arange(n)
        omega = np.exp(2j * np.pi / n)
        bases = [np.eye(n, dtype=complex)]
        for a in range(n):
            # b-th row: omega^(a j^2 + b j) / sqrt(n)
            bases.append(
                np.array([omega ** ((a * j * j + b * j) % n) for b in range(n)]) / np.sqrt(n)
            )
        rows = np.vstack(bases)
    else:
        raise ValueError(f"projective_design needs n prime (or 1, 2), got {n}")
    scale = (n * (n + 1)) ** 0.25
    rows = rows * scale
    if perturbation > 0:
        rng = derive_stream(seed, 1).generator()
        rows = rows + perturbation * (scale / np.sqrt(n)) * complex_normal(rng, rows.shape)
    return SamplingEnsemble(rows, model_tag="file")


def _check_hermitian(h: np.ndarray, n: int) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (n, n):
        raise DimensionError(f"matrix has shape {h.shape}, expected {(n, n)}")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return 0.5 * (h + h.conj().T)


def forward_intensity(ensemble: SamplingEnsemble, z) -> np.ndarray:
    z = as_signal(z, ensemble.n, "z")
    return np.abs(ensemble.analysis(z)) ** 2


def lifted_apply_hermitian(ensemble: SamplingEnsemble, h) -> np.ndarray:
    """A(H)_m = a_m^H H a_m for Hermitian H."""
    h = _check_hermitian(h, ensemble.n)
    a = ensemble.vectors
    vals = np.einsum("mi,ij,mj->m", a.conj(), h, a)
    scale = np.linalg.norm(h, 2) * np.max(np.sum(np.abs(a) ** 2, axis=1))
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ValueError("lifted measurement has a non-negligible imaginary part")
    return vals.real.copy()


def adjoint(ensemble: SamplingEnsemble, v) -> np.ndarray:
    """A^H(v) = sum_m v_m a_m a_m^H (unnormalised), symmetrised."""
    v = np.asarray(v, dtype=float)
    if v.shape != (ensemble.m,):
        raise DimensionError(f"vector has shape {v.shape}, expected ({ensemble.m},)")
    a = ensemble.vectors
    out = (a.T * v) @ a.conj()
    return 0.5 * (out + out.conj().T)


def normal_operator(ensemble: SamplingEnsemble, h) -> np.ndarray:
    """(1/M) A^H A (H)."""
    return adjoint(ensemble, lifted_apply_hermitian(ensemble, h)) / ensemble.m


@dataclass(frozen=True)
class SpectralEstimate:
    matrix: np.ndarray
    leading_value: Optional[float] = None
    leading_vector: Optional[np.ndarray] = None
    energy_estimate: Optional[float] = None


def spectral_matrix(ensemble: SamplingEnsemble, y) -> SpectralEstimate:
    y = np.asarray(y, dtype=float)
    if y.shape != (ensemble.m,):
        raise DimensionError(f"intensities have shape {y.shape}, expected ({ensemble.m},)")
    return SpectralEstimate(matrix=adjoint(ensemble, y) / ensemble.m)


# --- eigen-solvers -----------------------------------------------------------


def power_iteration(
    h: np.ndarray,
    start: np.ndarray,
    tol: float = 1e-10,
    cap: int = 5000,
    psd: bool = False,
) -> tuple[float, np.ndarray, int]:
    """Leading (largest algebraic) eigenpair of a Hermitian matrix.

    Unless ``psd`` is set, runs on ``h + s I`` with a Gershgorin shift ``s``
    that makes the matrix positive semi-definite, so the dominant eigenvalue is
    the algebraically largest one. Stops when the relative eigen-residual
    ``||H v - rho v|| <= tol * scale`` holds. Raises PowerIterationError if the
    cap is reached first.
    """
    radii = np.sum(np.abs(h), axis=1) - np.abs(np.diag(h))
    shift = 0.0 if psd else max(0.0, -float(np.min(np.diag(h).real - radii)))
    scale = max(float(np.max(np.abs(np.diag(h).real) + radii)), 1e-300)
    v = np.asarray(start, dtype=complex)
    v = v / np.linalg.norm(v)
    res = np.inf
    for it in range(1, cap + 1):
        w = h @ v
        rho = float(np.vdot(v, w).real)
        res = float(np.linalg.norm(w - rho * v))
        if res <= tol * scale:
            return rho, v, it
        w = w + shift * v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v, it
        v = w / nw
    raise PowerIterationError(
        f"power iteration did not converge in {cap} iterations (residual {res:.3e})", residual=res
    )


def _fallback_start(n: int) -> np.ndarray:
    return complex_normal(derive_stream(0x5EED, n).generator(), n)


def leading_eigenpair(
    h: np.ndarray, tol: float = 1e-10, cap: int = 5000, psd: bool = False
) -> tuple[float, np.ndarray]:
    """Power iteration from the normalised all-ones vector.

    If the Rayleigh quotient never moves from its starting value the start may
    be an eigenvector orthogonal to the leading one; a fixed pseudo-random
    start is then tried as well and the larger eigenvalue kept.
    """
    n = h.shape[0]
    ones = np.ones(n, dtype=complex) / np.sqrt(n)
    rho0 = float(np.vdot(ones, h @ ones).real)
    rho, v, _ = power_iteration(h, ones, tol, cap, psd)
    if abs(rho - rho0) <= tol * max(abs(rho), 1.0):
        rho2, v2, _ = power_iteration(h, _fallback_start(n), tol, cap, psd)
        if rho2 > rho + tol * max(abs(rho), 1.0):
            rho, v = rho2, v2
    return rho, v


def hermitian_spectral_norm(
    h: np.ndarray, method: Literal["auto", "dense", "power"] = "auto",
    tol: float = 1e-10, cap: int = 5000,
) -> float:
    """Largest |eigenvalue| of a Hermitian matrix.

    ``auto`` uses a dense eigendecomposition for N <= 64 and power iteration on
    +H and -H otherwise, falling back to dense on non-convergence.
    """
    n = h.shape[0]
    if method == "dense" or (method == "auto" and n <= DENSE_EIG_MAX_N):
        w = np.linalg.eigvalsh(h)
        return float(max(abs(w[0]), abs(w[-1])))
    try:
        top, _ = leading_eigenpair(h, tol, cap)
        bottom, _ = leading_eigenpair(-h, tol, cap)
    except PowerIterationError:
        if method == "power":
            raise
        return hermitian_spectral_norm(h, "dense")
    return float(max(abs(top), abs(bottom)))


# --- concentration diagnostics --------------------------------------------------


def delta_residual(
    ensemble: SamplingEnsemble, x, method: Literal["auto", "dense", "power"] = "auto"
) -> tuple[np.ndarray, float]:
    """Delta(xx^H) = (1/M) A^H A(xx^H) - xx^H - ||x||^2 I and its spectral norm.

    The norm is not divided by ||x||^2.
    """
    x = as_signal(x, ensemble.n, "x")
    nx2 = float(np.vdot(x, x).real)
    if nx2 == 0.0:
        raise ValueError("delta_residual needs a non-zero x")
    y = forward_intensity(ensemble, x)
    residual = adjoint(ensemble, y) / ensemble.m - np.outer(x, x.conj()) - nx2 * np.eye(ensemble.n)
    residual = 0.5 * (residual + residual.conj().T)
    return residual, hermitian_spectral_norm(residual, method)


def tight_frame_ratio(ensemble: SamplingEnsemble, x) -> float:
    """(1/M) ||A(xx^H)||^2 / ||xx^H||_F^2; equals 2 when the perturbation vanishes."""
    x = as_signal(x, ensemble.n, "x")
    nx2 = float(np.vdot(x, x).real)
    if nx2 == 0.0:
        raise ValueError("tight_frame_ratio needs a non-zero x")
    y = forward_intensity(ensemble, x)
    return float(np.mean(y**2) / nx2**2)
