"""Normal frame, second fundamental form and Hopf data of the explicit annuli.

With z = t + i theta the complex normal field is Omega = (u_zz)^perp, so

    Omega_1 = u_tt^perp / 2,    Omega_2 = -u_{t theta}^perp / 2.

The frame is N_1 = Omega_1/|Omega_1| and, in B^4, the unit N_2 completing
(u_t, u_theta, N_1, N_2) to a positively oriented basis.  Sign convention
for the hyperbolic angle: sinh(mu) = (Omega_2 . N_2)/sqrt(Omega . Omega),
cosh(mu) = |Omega_1|/sqrt(Omega . Omega).
"""
from __future__ import annotations

from dataclasses import dataclass
import math
import re
from typing import Callable

import numpy as np

from . import finite_diff as fd
from .errors import DegenerateFrame, LabelError, NonConstant, NotApplicable
from .surface_zoo import (
    TWO_PI,
    Jet2,
    SurfaceSpec,
    jet2,
    project_normal,
    solve_boundary_parameter,
    tangent_basis,
)

MU_CONVENTION = "Omega = (u_zz)^perp, Omega_2 = -u_tth^perp/2, sinh(mu) = Omega~_2 . N_2"


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _complete_frame(e1, e2, n1):
    """Unit w with det(e1, e2, n1, w) > 0 (R^4 cross product)."""
    rows = np.stack([e1, e2, n1], axis=-2)
    w = np.empty_like(n1)
    for i in range(4):
        # cofactor expansion along the last row
        minor = np.delete(rows, i, axis=-1)
        w[..., i] = (-1) ** (3 + i) * np.linalg.det(minor)
    return _unit(w)


@dataclass(frozen=True)
class LocalFrame:
    """Everything pointwise at a batch of parameter points."""

    jet: Jet2
    e1: np.ndarray
    e2: np.ndarray
    N1: np.ndarray
    N2: np.ndarray | None
    Omega1: np.ndarray
    Omega2: np.ndarray

    @property
    def e2w(self):
        return _dot(self.jet.u_t, self.jet.u_t)

    @property
    def hopf(self):
        return _dot(self.Omega1, self.Omega1) - _dot(self.Omega2, self.Omega2)

    def normals(self):
        return [self.N1] if self.N2 is None else [self.N1, self.N2]


def local_frame(spec: SurfaceSpec, t, th, *, check_domain: bool = True) -> LocalFrame:
    j = jet2(spec, t, th, check_domain=check_domain)
    e1, e2 = tangent_basis(j)
    O1 = 0.5 * project_normal(j, j.u_tt)
    O2 = -0.5 * project_normal(j, j.u_tth)
    norm1 = np.linalg.norm(O1, axis=-1, keepdims=True)
    if np.any(norm1 < 1e-12):
        raise DegenerateFrame("u_tt^perp vanishes; N_1 undefined")
    N1 = O1 / norm1
    if spec.dim == 3:
        # codimension one: N_1 is the unit normal itself
        return LocalFrame(j, e1, e2, N1, None, O1, O2)
    N2 = _complete_frame(e1, e2, N1)
    return LocalFrame(j, e1, e2, N1, N2, O1, O2)


def _off_domain(spec):
    # finite-difference stencils straddle t = +-T; the closed forms extend
    return lambda t, th: local_frame(spec, t, th, check_domain=False)


# -- second fundamental form -------------------------------------------------

@dataclass(frozen=True)
class SecondForm:
    Omega1: np.ndarray
    Omega2: np.ndarray
    b11: np.ndarray
    b12: np.ndarray
    b22: np.ndarray
    hopf: np.ndarray


def second_form(spec: SurfaceSpec, t, th) -> SecondForm:
    """b_ij = e^{-2 omega} (u_{x_i x_j})^perp in the orthonormal frame e^{-omega} d_i."""
    f = local_frame(spec, t, th)
    ie2w = (1.0 / f.e2w)[..., None]
    j = f.jet
    b11 = ie2w * project_normal(j, j.u_tt)
    b12 = ie2w * project_normal(j, j.u_tth)
    b22 = ie2w * project_normal(j, j.u_thth)
    return SecondForm(f.Omega1, f.Omega2, b11, b12, b22, f.hopf)


def simons_operator(sf: SecondForm, X):
    """B(X) = sum_ij (b_ij . X) b_ij."""
    out = np.zeros_like(X)
    for b, w in ((sf.b11, 1.0), (sf.b12, 2.0), (sf.b22, 1.0)):
        out = out + w * _dot(b, X)[..., None] * b
    return out


@dataclass(frozen=True)
class HopfConstant:
    value: float
    max_rel_deviation: float
    grid: int

    def __float__(self):
        return self.value


def hopf_constant(spec: SurfaceSpec, n_grid: int = 32, tol: float = 1e-6) -> HopfConstant:
    """|Omega_1|^2 - |Omega_2|^2, checked for constancy on an n x n grid."""
    T = solve_boundary_parameter(spec).T
    t = np.linspace(-T, T, n_grid)
    th = np.arange(n_grid) * (TWO_PI / n_grid)
    tt, hh = np.meshgrid(t, th, indexing="ij")
    h = local_frame(spec, tt, hh).hopf
    value = float(np.mean(h))
    dev = float(np.max(np.abs(h - value)) / abs(value))
    if dev > tol:
        raise NonConstant(f"Omega.Omega varies by {dev:.3e} (relative) on {spec.label()}")
    return HopfConstant(value, dev, n_grid)


# -- frame field, connection and mu ------------------------------------------

def _connection(spec, t, th):
    """(alpha_t, alpha_theta) with grad^perp_i N_1 = alpha_i N_2."""
    F = _off_domain(spec)
    N1 = lambda a, b: F(a, b).N1
    N2 = F(t, th).N2
    return tuple(_dot(fd.d1(N1, t, th, ax), N2) for ax in (0, 1))


def connection_coefficients(spec: SurfaceSpec, t):
    """alpha_t(t), alpha_theta(t); both depend on t only."""
    if spec.dim != 4:
        raise NotApplicable("normal connection is trivial in codimension one")
    t = np.asarray(t, dtype=float)
    return _connection(spec, t, np.zeros_like(t))


def mu(spec: SurfaceSpec, t, th=0.0):
    """Hyperbolic angle of the Hopf-normalized Omega (see module docstring)."""
    f = local_frame(spec, t, th, check_domain=False)
    scale = np.sqrt(f.hopf)
    if spec.dim == 3:
        return np.zeros_like(scale)
    return np.arcsinh(_dot(f.Omega2, f.N2) / scale)


def alpha_from_mu(spec: SurfaceSpec, t):
    """Connection predicted by grad^perp_z N_1 = i mu_z N_2.

    With mu = mu(t) the relation gives alpha_t = 0 and alpha_theta = -mu'(t).
    """
    t = np.asarray(t, dtype=float)
    dmu = fd.d1(lambda a, b: mu(spec, a, b), t, np.zeros_like(t), 0)
    return np.zeros_like(t), -dmu


@dataclass(frozen=True)
class FrameField:
    t: np.ndarray
    theta: np.ndarray
    N1: np.ndarray  # (nt, ntheta, n)
    N2: np.ndarray | None
    alpha_t: np.ndarray  # (nt,)
    alpha_theta: np.ndarray
    alpha_theta_variation: float
    alpha_relation_residual: float
    mu: np.ndarray
    parity1: int
    parity2: int | None
    convention: str = MU_CONVENTION


def _measure_parity(field_fn, spec, n_pairs=50, seed=0):
    """Sign eps with X(-t, theta + pi) = eps X(t, theta), and its residual."""
    rng = np.random.default_rng(seed)
    T = solve_boundary_parameter(spec).T
    t = rng.uniform(-T, T, n_pairs)
    th = rng.uniform(0.0, TWO_PI, n_pairs)
    a = field_fn(t, th)
    b = field_fn(-t, th + math.pi)
    scale = np.max(np.abs(a))
    res_plus = float(np.max(np.abs(b - a)) / scale)
    res_minus = float(np.max(np.abs(b + a)) / scale)
    return (1, res_plus) if res_plus <= res_minus else (-1, res_minus)


def build_frame(spec: SurfaceSpec, t_samples, th_samples) -> FrameField:
    if spec.dim != 4:
        raise NotApplicable("the two-vector normal frame exists only in B^4")
    t = np.asarray(t_samples, dtype=float)
    th = np.mod(np.asarray(th_samples, dtype=float), TWO_PI)
    tt, hh = np.meshgrid(t, th, indexing="ij")
    f = local_frame(spec, tt, hh)
    # orientation: N_2 must keep det(u_t, u_th, N_1, N_2) > 0 everywhere
    det = np.linalg.det(np.stack([f.e1, f.e2, f.N1, f.N2], axis=-2))
    if np.any(det <= 0.5):
        raise DegenerateFrame("normal frame orientation flips across samples")
    a_t, a_th = _connection(spec, tt, hh)
    variation = float(max(np.ptp(a_t, axis=1).max(), np.ptp(a_th, axis=1).max()))
    alpha_t, alpha_th = a_t.mean(axis=1), a_th.mean(axis=1)
    pred_t, pred_th = alpha_from_mu(spec, t)
    rel = float(max(np.max(np.abs(alpha_t - pred_t)), np.max(np.abs(alpha_th - pred_th))))
    if spec.cover.family == "fs" and (spec.k, spec.l) == (2, 1):
        p1, _ = _measure_parity(lambda a, b: local_frame(spec, a, b).N1, spec)
        p2, _ = _measure_parity(lambda a, b: local_frame(spec, a, b).N2, spec)
    else:
        p1 = p2 = None
    return FrameField(t, th, f.N1, f.N2, alpha_t, alpha_th, variation, rel, mu(spec, t), p1, p2)


def deck_parity_table(spec: SurfaceSpec, n_pairs: int = 50, seed: int = 0) -> dict:
    """Parities under the deck involution (t, theta) -> (-t, theta + pi).

    Returns ``{name: (sign, residual)}`` for u_t, u_theta, u_tt, u_ttheta,
    u_tt^perp, N_1 and N_2.
    """
    if spec.cover != SurfaceSpec.fraser_sargent(2, 1, scaling=spec.scaling):
        raise NotApplicable("deck involution is defined on the FS(2,1) cover only")
    J = lambda a, b: jet2(spec, a, b)
    F = lambda a, b: local_frame(spec, a, b)
    fields = {
        "u_t": lambda a, b: J(a, b).u_t,
        "u_theta": lambda a, b: J(a, b).u_th,
        "u_tt": lambda a, b: J(a, b).u_tt,
        "u_ttheta": lambda a, b: J(a, b).u_tth,
        "u_tt_perp": lambda a, b: project_normal(J(a, b), J(a, b).u_tt),
        "N1": lambda a, b: F(a, b).N1,
        "N2": lambda a, b: F(a, b).N2,
    }
    return {name: _measure_parity(fn, spec, n_pairs, seed) for name, fn in fields.items()}


# -- normal sections -----------------------------------------------------------

@dataclass(frozen=True)
class NormalSection:
    """X = f1 N_1 + f2 N_2 with coefficient callables of (t, theta).

    ``coeffs(t, theta)`` returns an array of shape (..., codim).
    """

    coeffs: Callable
    label: str

    def ambient(self, spec: SurfaceSpec, t, th, *, check_domain: bool = False):
        f = local_frame(spec, t, th, check_domain=check_domain)
        c = self.coeffs(t, th)
        out = c[..., 0:1] * f.N1
        if f.N2 is not None:
            out = out + c[..., 1:2] * f.N2
        return out


def _frame_section(spec, label, fn):
    """Section whose coefficients are read off a LocalFrame."""
    def coeffs(t, th):
        f = local_frame(spec, t, th, check_domain=False)
        vals = fn(f)
        return np.stack(vals[: spec.codim], axis=-1)
    return NormalSection(coeffs, label)


_VPERP = re.compile(r"^Vperp\((\d)\)$")

LABELS = ("Omega1", "Omega2", "JOmega1", "JOmega2", "Uperp", "Vperp(i)")


def special_section(spec: SurfaceSpec, label: str, *, normalized: bool = True) -> NormalSection:
    """One of the distinguished normal sections.

    Omega-derived sections are Hopf-normalized (Omega . Omega = 1) unless
    ``normalized=False``.  Vperp(i) uses the 1-based standard basis vector.
    """
    def scale(f):
        return np.sqrt(f.hopf) if normalized else 1.0

    zero = lambda f: np.zeros(f.e2w.shape)
    if label == "Omega1":
        return _frame_section(spec, label, lambda f: (_dot(f.Omega1, f.N1) / scale(f), zero(f)))
    if label == "Omega2":
        if spec.dim == 3:
            return _frame_section(spec, label, lambda f: (_dot(f.Omega2, f.N1) / scale(f),))
        return _frame_section(spec, label, lambda f: (zero(f), _dot(f.Omega2, f.N2) / scale(f)))
    if label in ("JOmega1", "JOmega2"):
        if spec.dim != 4:
            raise LabelError(f"{label} needs a complex structure on the normal bundle (B^4 only)")
        if label == "JOmega1":
            # J N_1 = N_2
            return _frame_section(spec, label, lambda f: (zero(f), _dot(f.Omega1, f.N1) / scale(f)))
        # J N_2 = -N_1
        return _frame_section(spec, label, lambda f: (-_dot(f.Omega2, f.N2) / scale(f), zero(f)))
    if label == "Uperp":
        return _frame_section(spec, label, lambda f: tuple(_dot(f.jet.u, N) for N in f.normals()))
    m = _VPERP.match(label)
    if m:
        i = int(m.group(1))
        if not 1 <= i <= spec.dim:
            raise LabelError(f"Vperp index {i} outside 1..{spec.dim}")
        return _frame_section(spec, label, lambda f: tuple(N[..., i - 1] for N in f.normals()))
    raise LabelError(f"unsupported section label {label!r}")


def custom_section(spec: SurfaceSpec, fn: Callable, label: str = "custom") -> NormalSection:
    """Section with user coefficients fn(t, theta) -> (..., codim)."""
    return NormalSection(fn, label)
