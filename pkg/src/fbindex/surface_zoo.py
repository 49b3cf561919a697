"""Explicit S^1-symmetric free boundary minimal annuli in the unit ball.

Three families are available:

* the critical q-catenoid in B^3,
* the Fraser-Sargent annuli FS(k, l), k > l >= 1, in B^4,
* the critical Moebius band, realized as FS(2, 1) with the deck
  involution (t, theta) -> (-t, theta + pi) factored out.

Every immersion is a sum of "planar blocks" ``A(t) (cos m theta, sin m theta)``
plus, for the catenoid, an axial coordinate ``q t``.  The jets below are
exact closed-form derivatives of that representation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import optimize

from .errors import DomainError, NonConvergence, ScalingError, SpecError

__all__ = [
    "SurfaceSpec",
    "Jet2",
    "BoundaryParameter",
    "solve_boundary_parameter",
    "scale_radius",
    "jet2",
    "conformal_factor",
    "omega",
    "normal_project",
    "tangent_basis",
    "steklov_coordinate_check",
    "rotation_generator",
]

TWO_PI = 2.0 * math.pi

UNIT = "unit"
RAW = "raw"


@dataclass(frozen=True)
class SurfaceSpec:
    """Which explicit surface, in which scaling.

    ``family`` is one of ``"catenoid"``, ``"fs"`` or ``"mobius"``.  The
    Moebius band is stored with ``k=2, l=1, quotient=True``; use the
    constructors rather than building instances by hand.
    """

    family: str
    q: int = 1
    k: int = 2
    l: int = 1
    scaling: str = UNIT
    quotient: bool = False

    def __post_init__(self):
        if self.scaling not in (UNIT, RAW):
            raise SpecError(f"unknown scaling {self.scaling!r}")
        if self.family == "catenoid":
            if int(self.q) != self.q or self.q < 1:
                raise SpecError("q-catenoid needs a positive integer q")
            if self.quotient:
                raise SpecError("quotient flag is only valid for the Moebius band")
        elif self.family == "fs":
            if self.l < 1 or self.k <= self.l:
                raise SpecError(
                    f"Fraser-Sargent annulus needs integers k > l >= 1, got k={self.k}, l={self.l}")
            if self.quotient:
                raise SpecError("quotient flag is only valid for the Moebius band")
        elif self.family == "mobius":
            if (self.k, self.l) != (2, 1) or not self.quotient:
                raise SpecError("the Moebius band is FS(2,1) with quotient=True")
        else:
            raise SpecError(f"unknown family {self.family!r}")

    @classmethod
    def catenoid(cls, q: int = 1, scaling: str = UNIT) -> "SurfaceSpec":
        return cls("catenoid", q=q, scaling=scaling)

    @classmethod
    def fraser_sargent(cls, k: int, l: int, scaling: str = UNIT) -> "SurfaceSpec":
        return cls("fs", k=k, l=l, scaling=scaling)

    @classmethod
    def mobius(cls, scaling: str = UNIT) -> "SurfaceSpec":
        return cls("mobius", k=2, l=1, scaling=scaling, quotient=True)

    @property
    def dim(self) -> int:
        """Ambient dimension n of the ball B^n."""
        return 3 if self.family == "catenoid" else 4

    @property
    def codim(self) -> int:
        return self.dim - 2

    @property
    def cover(self) -> "SurfaceSpec":
        """The orientable annulus the surface is parametrized on."""
        if self.family == "mobius":
            return SurfaceSpec.fraser_sargent(2, 1, scaling=self.scaling)
        return self

    def with_scaling(self, scaling: str) -> "SurfaceSpec":
        return SurfaceSpec(self.family, self.q, self.k, self.l, scaling, self.quotient)

    def label(self) -> str:
        if self.family == "catenoid":
            return f"catenoid(q={self.q})"
        if self.family == "fs":
            return f"fs(k={self.k},l={self.l})"
        return "mobius"

    def as_dict(self) -> dict:
        d = {"family": self.family, "scaling": self.scaling, "quotient": self.quotient}
        if self.family == "catenoid":
            d["q"] = self.q
        else:
            d["k"], d["l"] = self.k, self.l
        return d


@dataclass(frozen=True)
class BoundaryParameter:
    T: float
    residual: float


@dataclass(frozen=True)
class Jet2:
    """Position and first/second partials at parameter points.

    Arrays have shape ``(..., n)`` with the leading shape of the
    broadcast (t, theta) input.
    """

    u: np.ndarray
    u_t: np.ndarray
    u_th: np.ndarray
    u_tt: np.ndarray
    u_tth: np.ndarray
    u_thth: np.ndarray

    def scaled(self, c: float) -> "Jet2":
        return Jet2(*(c * a for a in (self.u, self.u_t, self.u_th, self.u_tt, self.u_tth, self.u_thth)))


# -- boundary parameter ------------------------------------------------------

def _bisect_newton(f, df, a, b):
    x = optimize.bisect(f, a, b, xtol=1e-10, maxiter=200)
    for _ in range(8):
        fx = f(x)
        if fx == 0.0:
            break
        step = fx / df(x)
        x -= step
        if abs(step) < 1e-16 * max(1.0, abs(x)):
            break
    return x


@lru_cache(maxsize=None)
def _catenoid_root() -> float:
    # coth t = t on [1, 2]
    f = lambda t: 1.0 / math.tanh(t) - t
    df = lambda t: -1.0 / math.sinh(t) ** 2 - 1.0
    return _bisect_newton(f, df, 1.0, 2.0)


@lru_cache(maxsize=None)
def _fs_root(k: int, l: int) -> float:
    # k tanh(kt) = l coth(lt); f increases from -inf to k - l > 0
    f = lambda t: k * math.tanh(k * t) - l / math.tanh(l * t)
    df = lambda t: k * k / math.cosh(k * t) ** 2 + l * l / math.sinh(l * t) ** 2
    grid = np.arange(0.1, 5.0 + 1e-9, 0.1)
    a = None
    for lo, hi in zip(grid[:-1], grid[1:]):
        if f(lo) < 0.0 <= f(hi):
            a = (lo, hi)
            break
    if a is None:
        raise NonConvergence(f"no sign change of k tanh(kt) - l coth(lt) on [0.1, 5] for k={k}, l={l}")
    return _bisect_newton(f, df, *a)


@lru_cache(maxsize=None)
def solve_boundary_parameter(spec: SurfaceSpec) -> BoundaryParameter:
    """Half-length T of the parameter interval [-T, T]."""
    if spec.family == "catenoid":
        t10 = _catenoid_root()
        T = t10 / spec.q
        res = 1.0 / math.tanh(spec.q * T) - spec.q * T
    else:
        k, l = spec.k, spec.l
        T = _fs_root(k, l)
        res = k * math.tanh(k * T) - l / math.tanh(l * T)
    return BoundaryParameter(T=T, residual=res)


@lru_cache(maxsize=None)
def scale_radius(spec: SurfaceSpec) -> float:
    """Norm of the unscaled position vector on the boundary (r_q or r_{k,l})."""
    T = solve_boundary_parameter(spec).T
    if spec.family == "catenoid":
        t10 = spec.q * T
        return math.sqrt(math.cosh(t10) ** 2 + t10 ** 2)
    k, l = spec.k, spec.l
    return math.sqrt(k * k * math.sinh(l * T) ** 2 + l * l * math.cosh(k * T) ** 2)


def _blocks(spec: SurfaceSpec, t):
    """(amplitude, d amplitude, dd amplitude, frequency) per planar block."""
    if spec.family == "catenoid":
        q = spec.q
        return [(np.cosh(q * t), q * np.sinh(q * t), q * q * np.cosh(q * t), q)]
    k, l = spec.k, spec.l
    return [
        (k * np.sinh(l * t), k * l * np.cosh(l * t), k * l * l * np.sinh(l * t), l),
        (l * np.cosh(k * t), l * k * np.sinh(k * t), l * k * k * np.cosh(k * t), k),
    ]


def _check_domain(spec: SurfaceSpec, t):
    T = solve_boundary_parameter(spec).T
    if np.any(np.abs(t) > T * (1.0 + 1e-12)):
        raise DomainError(f"|t| exceeds T = {T!r} for {spec.label()}")


def _raw_jet(spec: SurfaceSpec, t, th) -> Jet2:
    t, th = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(th, dtype=float))
    th = np.mod(th, TWO_PI)
    comps = {name: [] for name in ("u", "u_t", "u_th", "u_tt", "u_tth", "u_thth")}
    for A, dA, ddA, m in _blocks(spec, t):
        c, s = np.cos(m * th), np.sin(m * th)
        comps["u"] += [A * c, A * s]
        comps["u_t"] += [dA * c, dA * s]
        comps["u_th"] += [-m * A * s, m * A * c]
        comps["u_tt"] += [ddA * c, ddA * s]
        comps["u_tth"] += [-m * dA * s, m * dA * c]
        comps["u_thth"] += [-m * m * A * c, -m * m * A * s]
    if spec.family == "catenoid":
        q = spec.q
        zero = np.zeros_like(t)
        comps["u"].append(q * t)
        comps["u_t"].append(np.full_like(t, float(q)))
        for name in ("u_th", "u_tt", "u_tth", "u_thth"):
            comps[name].append(zero)
    return Jet2(**{name: np.stack(v, axis=-1) for name, v in comps.items()})


def jet2(spec: SurfaceSpec, t, th, *, check_domain: bool = True) -> Jet2:
    """Closed-form 2-jet of the immersion at (t, theta); vectorized."""
    if check_domain:
        _check_domain(spec, t)
    jet = _raw_jet(spec, t, th)
    if spec.scaling == UNIT:
        jet = jet.scaled(1.0 / scale_radius(spec))
    return jet


def conformal_factor(spec: SurfaceSpec, t):
    """e^{2 omega}(t) = |u_t|^2 = |u_theta|^2."""
    j = jet2(spec, t, 0.0)
    return np.sum(j.u_t ** 2, axis=-1)


def omega(spec: SurfaceSpec, t):
    return 0.5 * np.log(conformal_factor(spec, t))


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def tangent_basis(jet: Jet2):
    """Unit tangents (e_1, e_2) = e^{-omega} (u_t, u_theta)."""
    e1 = jet.u_t / np.linalg.norm(jet.u_t, axis=-1, keepdims=True)
    e2 = jet.u_th / np.linalg.norm(jet.u_th, axis=-1, keepdims=True)
    return e1, e2


def project_normal(jet: Jet2, v):
    """Normal projection of ambient vectors ``v`` using a precomputed jet."""
    v = np.asarray(v, dtype=float)
    a, b = jet.u_t, jet.u_th
    out = v - (_dot(v, a) / _dot(a, a))[..., None] * a - (_dot(v, b) / _dot(b, b))[..., None] * b
    return out


def normal_project(spec: SurfaceSpec, t, th, v):
    """v^perp at (t, theta)."""
    return project_normal(jet2(spec, t, th), v)


def rotation_generator(spec: SurfaceSpec) -> np.ndarray:
    """Skew matrix G with u(t, theta + s) = exp(sG) u(t, theta)."""
    n = spec.dim
    G = np.zeros((n, n))
    freqs = [spec.q] if spec.family == "catenoid" else [spec.l, spec.k]
    for i, m in enumerate(freqs):
        G[2 * i + 1, 2 * i] = m
        G[2 * i, 2 * i + 1] = -m
    return G


def steklov_coordinate_check(spec: SurfaceSpec, n_theta: int = 64, scale: float = 1.0) -> float:
    """max |d_eta u^i - u^i| over both boundary circles.

    ``scale`` multiplies the immersion; anything other than 1 is a
    negative control (the boundary leaves the unit sphere).
    """
    if spec.scaling != UNIT:
        raise ScalingError("the Steklov identity d_eta u = u needs UnitBall scaling")
    T = solve_boundary_parameter(spec).T
    th = np.arange(n_theta) * (TWO_PI / n_theta)
    worst = 0.0
    for sign in (1.0, -1.0):
        j = jet2(spec, sign * T, th).scaled(scale)
        ew = np.linalg.norm(j.u_t, axis=-1, keepdims=True)
        d_eta = sign * j.u_t / ew
        worst = max(worst, float(np.max(np.abs(d_eta - j.u))))
    return worst
