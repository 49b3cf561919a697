"""Steklov spectrum of the S^1-symmetric annuli by separation of variables.

In the conformal coordinates (t, theta) harmonic functions are flat-harmonic,
so the mode ``f(t) cos(n theta)`` satisfies f'' = n^2 f and the Steklov
condition on t = +-T reads e^{-omega(T)} f'(T) = sigma f(T).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonConvergence, ScalingError
from .surface_zoo import UNIT, SurfaceSpec, conformal_factor, jet2, solve_boundary_parameter

DEFAULT_N_MAX = 12
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SteklovMode:
    n: int
    t_parity: str  # "even" | "odd"
    sigma: float
    multiplicity: int


@dataclass(frozen=True)
class SpectralIndexResult:
    index: int
    unit_eigenvalues: int
    tol: float
    tail_sigma: float  # sigma_even(n_max), must exceed 2


def _require_unit(spec):
    if spec.scaling != UNIT:
        raise ScalingError("Steklov computations need the boundary on the unit sphere")


def boundary_length_factor(spec: SurfaceSpec) -> float:
    """e^{omega(T)}: ds = e^{omega(T)} dtheta on each boundary circle."""
    T = solve_boundary_parameter(spec).T
    return math.sqrt(float(conformal_factor(spec, T)))


def closed_form_sigma(spec: SurfaceSpec, n: int, t_parity: str) -> float:
    T = solve_boundary_parameter(spec).T
    inv = 1.0 / boundary_length_factor(spec)
    if n == 0:
        return 0.0 if t_parity == "even" else inv / T
    if t_parity == "even":
        return inv * n * math.tanh(n * T)
    return inv * n / math.tanh(n * T)


def deck_invariant(n: int, t_parity: str) -> bool:
    """Is cos/sin(n theta) f(t) invariant under (t, theta) -> (-t, theta + pi)?"""
    return (t_parity == "even") == (n % 2 == 0)


def steklov_spectrum(spec: SurfaceSpec, n_max: int = DEFAULT_N_MAX) -> list[SteklovMode]:
    _require_unit(spec)
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    modes = []
    for n in range(n_max + 1):
        for parity in ("even", "odd"):
            if spec.quotient and not deck_invariant(n, parity):
                continue
            mult = 1 if n == 0 else 2
            modes.append(SteklovMode(n, parity, closed_form_sigma(spec, n, parity), mult))
    modes.sort(key=lambda m: (m.sigma, m.n, m.t_parity))
    return modes


def dtn_oracle(spec: SurfaceSpec, n: int) -> tuple[float, float]:
    """(sigma_even, sigma_odd) for frequency n by shooting f'' = n^2 f from t = 0."""
    if n < 0:
        raise ValueError("frequency must be nonnegative")
    T = solve_boundary_parameter(spec).T
    inv = 1.0 / boundary_length_factor(spec)
    out = []
    for y0 in ((1.0, 0.0), (0.0, 1.0)):
        sol = solve_ivp(lambda t, y: (y[1], n * n * y[0]), (0.0, T), y0,
                        method="DOP853", rtol=1e-13, atol=1e-15)
        if not sol.success:
            raise NonConvergence(f"shooting failed for n={n}: {sol.message}")
        f, df = sol.y[0, -1], sol.y[1, -1]
        out.append(inv * df / f)
    return out[0], out[1]


def spectral_index(spec: SurfaceSpec, tol: float = DEFAULT_TOL,
                   n_max: int = DEFAULT_N_MAX) -> SpectralIndexResult:
    """Number of Steklov eigenvalues strictly below 1 - tol, with multiplicity."""
    modes = steklov_spectrum(spec, n_max)
    index = sum(m.multiplicity for m in modes if m.sigma < 1.0 - tol)
    unit = sum(m.multiplicity for m in modes if abs(m.sigma - 1.0) < tol)
    return SpectralIndexResult(index, unit, tol, closed_form_sigma(spec, n_max, "even"))


def boundary_weight_residual(spec: SurfaceSpec, n_theta: int = 64) -> float:
    """max | |grad_eta u| - 1 | on both boundary circles."""
    _require_unit(spec)
    T = solve_boundary_parameter(spec).T
    th = np.arange(n_theta) * (2.0 * math.pi / n_theta)
    worst = 0.0
    for s in (T, -T):
        j = jet2(spec, s, th)
        d_eta = np.sign(s) * j.u_t / np.linalg.norm(j.u_t, axis=-1, keepdims=True)
        # |grad_eta u| is the component of d_eta u along the outward normal u of the sphere
        w = np.sum(d_eta * j.u, axis=-1)
        worst = max(worst, float(np.max(np.abs(w - 1.0))))
    return worst
