"""Numerical residual checks of the structural identities of the annuli.

Every check evaluates an identity at quasi-random parameter points and
reports the worst residual, each one divided by the largest constituent
term at that sample.  Derivatives of fields are taken with the central
differences of :mod:`fbindex.finite_diff`; nested derivatives (normal
Laplacians, curvature commutators) use the step ``H2`` at both levels so
the two stencils share nodes and their rounding errors largely cancel.

Complex normal sections are handled as complex ambient vectors; the
normal projection acts on real and imaginary parts separately and the
dot product is the bilinear one (no conjugation), matching ``X . Omega``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.stats import qmc

from . import finite_diff as fd
from .errors import LabelError, NotApplicable
from .normal_frame import local_frame, second_form, simons_operator
from .surface_zoo import TWO_PI, SurfaceSpec, jet2, omega, solve_boundary_parameter

PASS, FAIL, NA = "pass", "fail", "not_applicable"

DEFAULT_SAMPLES = 128
BOUNDARY_NODES = 256

# algebraic identities reach round-off; one FD level costs ~1e-10, two ~1e-7
TOL_ALGEBRAIC = 1e-10
TOL_FD1 = 1e-7
TOL_FD2 = 1e-5
TOL_BOUNDARY = 1e-8

CLAIM_IDS = (
    "C1_conformal",
    "C1_harmonic",
    "C2_uzz",
    "C2_Xz",
    "C3_holomorphic",
    "C3_curvature_commutator",
    "C4_laplacian",
    "C5_frame",
    "C5_b12_boundary",
    "C6_orthogonality",
    "C6_laplace_omega",
    "C6_simons",
    "P_dot_constant",
    "P_vperp_jacobi",
    "T_mainintro_cross_terms",
    "T_mainintro_boundary_integrals",
    "T_indFS_J_jacobi",
    "descent",
)


@dataclass(frozen=True)
class ClaimCheck:
    claim_id: str
    max_residual: float
    samples: int
    tolerance: float
    verdict: str

    @property
    def applicable(self) -> bool:
        return self.verdict != NA

    def as_dict(self) -> dict:
        return asdict(self)


# -- pointwise helpers ---------------------------------------------------------

def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _norm(v):
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))


def _rel(diff, *terms):
    """Per-sample |diff| / max |term|, maximized over samples."""
    scale = np.max(np.stack([_norm(x) for x in terms]), axis=0)
    scale = np.maximum(scale, np.finfo(float).tiny)
    return float(np.max(_norm(diff) / scale))


def _perp(spec, t, th, V):
    """Normal projection, linear over C."""
    j = jet2(spec, t, th, check_domain=False)
    a, b = j.u_t, j.u_th
    return (V - (_dot(V, a) / _dot(a, a))[..., None] * a
            - (_dot(V, b) / _dot(b, b))[..., None] * b)


def _e2w(spec, t):
    return np.exp(2.0 * omega(spec, t))


def _field_Omega(spec):
    """Omega = (u_zz)^perp straight from the complex second derivative."""
    def F(t, th):
        j = jet2(spec, t, th, check_domain=False)
        uzz = 0.25 * (j.u_tt - j.u_thth - 2j * j.u_tth)
        return _perp(spec, t, th, uzz)
    return F


def _field_vperp(spec, i):
    e = np.zeros(spec.dim)
    e[i] = 1.0
    return lambda t, th: _perp(spec, t, th, np.broadcast_to(e, np.shape(t) + (spec.dim,)))


def _field_J(spec, which):
    """J Omega_1 or J Omega_2 with J N_1 = N_2, J N_2 = -N_1."""
    def F(t, th):
        f = local_frame(spec, t, th, check_domain=False)
        if which == 1:
            return _dot(f.Omega1, f.N1)[..., None] * f.N2
        return -_dot(f.Omega2, f.N2)[..., None] * f.N1
    return F


def _test_sections(spec):
    """Finite family standing in for 'any section X': Omega, conj(Omega), v_i^perp."""
    Om = _field_Omega(spec)
    out = {"Omega": Om, "Omega_bar": lambda t, th: np.conj(Om(t, th))}
    for i in range(spec.dim):
        out[f"v{i + 1}"] = _field_vperp(spec, i)
    return out


def _second_scale(spec, F, t, th):
    """e^{-2 omega}(|X_tt| + |X_thth|): the size of any second-order term.

    Used as the natural scale where the normal parts vanish identically
    (e.g. Omega on the catenoid is a constant multiple of the normal).
    """
    s = _norm(fd.d2(F, t, th, 0)) + _norm(fd.d2(F, t, th, 1))
    return (s / _e2w(spec, t))[..., None] * np.ones(np.shape(t) + (spec.dim,))


def nabla(spec, F, direction, h=fd.H1):
    """Normal covariant derivative along 't', 'theta', 'z' or 'zbar'."""
    def G(t, th):
        if direction in ("t", "theta"):
            d = fd.d1(F, t, th, 0 if direction == "t" else 1, h)
        else:
            sign = -1j if direction == "z" else 1j
            d = 0.5 * (fd.d1(F, t, th, 0, h) + sign * fd.d1(F, t, th, 1, h))
        return _perp(spec, t, th, d)
    return G


def normal_laplacian(spec, F):
    """Delta^perp from its frame definition with e_i = e^{-omega} d_i.

    sum_i nabla_{e_i} nabla_{e_i} X - nabla_{(nabla_{e_i} e_i)^T} X
    """
    inner = {ax: nabla(spec, F, ax, fd.H2) for ax in ("t", "theta")}

    def G(t, th):
        ew = np.exp(-omega(spec, t))[..., None]
        out = 0.0
        for ax, axis in (("t", 0), ("theta", 1)):
            scaled = lambda a, b, ax=ax: np.exp(-omega(spec, a))[..., None] * inner[ax](a, b)
            out = out + ew * _perp(spec, t, th, fd.d1(scaled, t, th, axis, fd.H2))
        # W = sum_i (nabla_{e_i} e_i)^T, expanded in the coordinate basis
        j = jet2(spec, t, th, check_domain=False)
        W = 0.0
        for axis, name in ((0, "u_t"), (1, "u_th")):
            ei = lambda a, b, name=name: (np.exp(-omega(spec, a))[..., None]
                                          * getattr(jet2(spec, a, b, check_domain=False), name))
            W = W + ew * fd.d1(ei, t, th, axis, fd.H2)
        e2w = _dot(j.u_t, j.u_t)[..., None]
        a = _dot(W, j.u_t)[..., None] / e2w
        b = _dot(W, j.u_th)[..., None] / e2w
        return out - a * inner["t"](t, th) - b * inner["theta"](t, th)
    return G


def complex_laplacian(spec, F):
    """2 e^{-2 omega} (nabla_zbar nabla_z + nabla_z nabla_zbar) X."""
    zz = nabla(spec, nabla(spec, F, "z", fd.H2), "zbar", fd.H2)
    zbz = nabla(spec, nabla(spec, F, "zbar", fd.H2), "z", fd.H2)
    return lambda t, th: 2.0 / _e2w(spec, t)[..., None] * (zz(t, th) + zbz(t, th))


# -- samples -------------------------------------------------------------------

def sample_points(spec: SurfaceSpec, n: int, seed: int = 0, rotate: float = 0.0):
    """Scrambled Halton points in (-T, T) x [0, 2 pi)."""
    T = solve_boundary_parameter(spec).T
    x = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    return T * (2.0 * x[:, 0] - 1.0), np.mod(TWO_PI * x[:, 1] + rotate, TWO_PI)


def boundary_points(spec: SurfaceSpec, n: int, seed: int = 0, rotate: float = 0.0):
    """n points on t = +T and n on t = -T, theta quasi-uniform."""
    T = solve_boundary_parameter(spec).T
    th = np.mod(TWO_PI * qmc.Halton(d=1, scramble=True, seed=seed).random(n)[:, 0] + rotate, TWO_PI)
    return np.concatenate([np.full(n, T), np.full(n, -T)]), np.concatenate([th, th])


# -- the checks ------------------------------------------------------------------

def _c1_conformal(spec, t, th):
    j = jet2(spec, t, th, check_domain=False)
    uz = 0.5 * (j.u_t - 1j * j.u_th)
    a, b = _dot(j.u_t, j.u_t), _dot(j.u_th, j.u_th)
    res = np.abs(a - b) + np.abs(_dot(j.u_t, j.u_th)) + 4.0 * np.abs(_dot(uz, uz))
    return float(np.max(res / a))


def _c1_harmonic(spec, t, th):
    j = jet2(spec, t, th, check_domain=False)
    return _rel(j.u_tt + j.u_thth, j.u_tt, j.u_thth)


def _c2_uzz(spec, t, th):
    j = jet2(spec, t, th, check_domain=False)
    uzz = 0.25 * (j.u_tt - j.u_thth - 2j * j.u_tth)
    uz = 0.5 * (j.u_t - 1j * j.u_th)
    w = lambda a, b: omega(spec, a) + 0.0 * b
    wz = 0.5 * (fd.d1(w, t, th, 0) - 1j * fd.d1(w, t, th, 1))
    Om = _field_Omega(spec)(t, th)
    rhs = 2.0 * wz[..., None] * uz + Om
    return _rel(uzz - rhs, uzz, 2.0 * wz[..., None] * uz, Om)


def _c2_xz(spec, t, th):
    j = jet2(spec, t, th, check_domain=False)
    uz = 0.5 * (j.u_t - 1j * j.u_th)
    uzb = np.conj(uz)
    Om = _field_Omega(spec)(t, th)
    c = 2.0 / _e2w(spec, t)
    worst = 0.0
    for X in _test_sections(spec).values():
        x = X(t, th)
        for direction, conj_om, partner in (("z", Om, uzb), ("zbar", np.conj(Om), uz)):
            d = 0.5 * (fd.d1(X, t, th, 0) + (-1j if direction == "z" else 1j) * fd.d1(X, t, th, 1))
            cov = _perp(spec, t, th, d)
            corr = (c * _dot(x, conj_om))[..., None] * partner
            worst = max(worst, _rel(d - (cov - corr), d, cov, corr))
    return worst


def _c3_holomorphic(spec, t, th):
    F = _field_Omega(spec)
    d = 0.5 * (fd.d1(F, t, th, 0) + 1j * fd.d1(F, t, th, 1))
    dz = 0.5 * (fd.d1(F, t, th, 0) - 1j * fd.d1(F, t, th, 1))
    return _rel(_perp(spec, t, th, d), d, dz)


def _c3_commutator(spec, t, th):
    Om = _field_Omega(spec)(t, th)
    c = 2.0 / _e2w(spec, t)
    worst = 0.0
    for X in _test_sections(spec).values():
        a = nabla(spec, nabla(spec, X, "z", fd.H2), "zbar", fd.H2)(t, th)
        b = nabla(spec, nabla(spec, X, "zbar", fd.H2), "z", fd.H2)(t, th)
        x = X(t, th)
        rhs = c[..., None] * (_dot(x, Om)[..., None] * np.conj(Om) - _dot(x, np.conj(Om))[..., None] * Om)
        worst = max(worst, _rel(a - b - rhs, a, b, rhs, _second_scale(spec, X, t, th)))
    return worst


def _c4_laplacian(spec, t, th):
    worst = 0.0
    for X in _test_sections(spec).values():
        lhs = normal_laplacian(spec, X)(t, th)
        rhs = complex_laplacian(spec, X)(t, th)
        worst = max(worst, _rel(lhs - rhs, lhs, rhs, _second_scale(spec, X, t, th)))
    return worst


def _c5_frame(spec, t, th):
    sf = second_form(spec, t, th)
    Om = _field_Omega(spec)(t, th)
    e2w = _e2w(spec, t)[..., None]
    r1 = _rel(Om.real - 0.5 * e2w * sf.b11, Om.real, 0.5 * e2w * sf.b11)
    r2 = _rel(Om.imag + 0.5 * e2w * sf.b12, Om.imag, 0.5 * e2w * sf.b12, Om.real)
    return max(r1, r2)


def _c5_boundary(spec, t, th):
    Om = _field_Omega(spec)(t, th)
    return _rel(Om.imag, Om.real)


def _c6_orthogonality(spec, t, th):
    Om = _field_Omega(spec)(t, th)
    O1, O2 = Om.real, Om.imag
    n1 = _dot(O1, O1)
    r1 = float(np.max(np.abs(_dot(O1, O2)) / n1))
    r2 = float(np.max(np.abs(_dot(Om, Om) - (n1 - _dot(O2, O2))) / n1))
    return max(r1, r2)


def _c6_laplace_omega(spec, t, th):
    F = _field_Omega(spec)
    Om = F(t, th)
    O1, O2 = Om.real, Om.imag
    c = 8.0 / _e2w(spec, t)[..., None] ** 2
    lap = normal_laplacian(spec, F)(t, th)
    rhs = 0.5 * c * (_dot(Om, Om)[..., None] * np.conj(Om) - _dot(Om, np.conj(Om))[..., None] * Om)
    ref = _second_scale(spec, F, t, th)
    r = _rel(lap - rhs, lap, rhs, ref)
    r1 = _rel(lap.real + c * _dot(O2, O2)[..., None] * O1, lap.real, ref)
    r2 = _rel(lap.imag + c * _dot(O1, O1)[..., None] * O2, lap.imag, ref)
    return max(r, r1, r2)


def _c6_simons(spec, t, th):
    sf = second_form(spec, t, th)
    c = 8.0 / _e2w(spec, t)[..., None] ** 2
    worst = 0.0
    for O in (sf.Omega1, sf.Omega2):
        lhs = simons_operator(sf, O)
        rhs = c * _dot(O, O)[..., None] * O
        # scale by the Omega_1 term so the boundary zero of Omega_2 is harmless
        ref = c * _dot(sf.Omega1, sf.Omega1)[..., None] * sf.Omega1
        worst = max(worst, _rel(lhs - rhs, lhs, rhs, ref))
    return worst


def _p_dot(spec, t, th):
    Om = _field_Omega(spec)(t, th)
    h = _dot(Om, Om)
    mean = np.mean(h.real)
    return float(np.max(np.abs(h - mean)) / abs(mean))


def _jacobi_residual(spec, F, t, th):
    lap = normal_laplacian(spec, F)(t, th)
    x = F(t, th).real
    sf = second_form(spec, t, th)
    B = simons_operator(sf, x)
    return _rel(lap + B, lap, B, _second_scale(spec, F, t, th))


def _p_vperp(spec, t, th):
    return max(_jacobi_residual(spec, _field_vperp(spec, i), t, th) for i in range(spec.dim))


def _t_cross_terms(spec, t, th):
    """Boundary facts used for S(Omega_1, v_i^perp) = 0.

    nabla_eta Omega_1 . Omega_1 = 0 and nabla_eta Omega_2 . Omega_1 = 0 (from
    Omega . Omega constant), and nabla_eta v^perp = -(v . eta) b_11.
    """
    F = _field_Omega(spec)
    sgn = np.sign(t)[..., None]
    ew = np.exp(-omega(spec, t))[..., None]
    raw = sgn * ew * fd.d1(F, t, th, 0)
    cov = _perp(spec, t, th, raw)
    Om = F(t, th)
    O1 = Om.real
    scale = _norm(raw.real) * _norm(O1)
    r1 = float(np.max((np.abs(_dot(cov.real, O1)) + np.abs(_dot(cov.imag, O1))) / scale))
    j = jet2(spec, t, th, check_domain=False)
    eta = sgn * j.u_t / np.linalg.norm(j.u_t, axis=-1, keepdims=True)
    sf = second_form(spec, t, th)
    r2 = 0.0
    for i in range(spec.dim):
        V = _field_vperp(spec, i)
        d = sgn * ew * fd.d1(V, t, th, 0)
        lhs = _perp(spec, t, th, d)
        rhs = -eta[..., i:i + 1] * sf.b11
        r2 = max(r2, _rel(lhs - rhs, d, sf.b11))
    return max(r1, r2)


def _t_boundary_integrals(spec, t, th):
    """Trapezoid rule on BOUNDARY_NODES equispaced nodes per circle (spectral).

    Both u^i and b_22^i integrate to zero over the whole boundary.  On one
    circle b_22 = dw/ds + u (w the unit velocity), so per circle the b_22
    integral equals that of u, which is nonzero on the catenoid.
    """
    T = solve_boundary_parameter(spec).T
    nodes = np.arange(BOUNDARY_NODES) * (TWO_PI / BOUNDARY_NODES)
    ds = math.sqrt(float(_e2w(spec, T))) * TWO_PI / BOUNDARY_NODES
    totals, masses = [0.0, 0.0], [0.0, 0.0]
    for s in (T, -T):
        tt = np.full_like(nodes, s)
        for k, field in enumerate((jet2(spec, tt, nodes).u, second_form(spec, tt, nodes).b22)):
            totals[k] = totals[k] + field.sum(axis=0) * ds
            masses[k] = masses[k] + np.abs(field).sum(axis=0) * ds
    return max(float(np.abs(a).max() / m.max()) for a, m in zip(totals, masses))


def _t_j_jacobi(spec, t, th):
    if spec.dim != 4:
        raise NotApplicable("J needs a two-dimensional normal bundle")
    return max(_jacobi_residual(spec, _field_J(spec, w), t, th) for w in (1, 2))


DESCENT_SIGNS = {
    "u_t": -1, "u_theta": 1, "u_tt": 1, "u_ttheta": -1, "u_tt_perp": 1,
    "Omega1": 1, "Omega2": -1, "JOmega2": 1, "N1": 1, "N2": -1,
}


def descent_fields(spec):
    J = lambda a, b: jet2(spec, a, b, check_domain=False)
    F = lambda a, b: local_frame(spec, a, b, check_domain=False)
    out = {
        "u_t": lambda a, b: J(a, b).u_t,
        "u_theta": lambda a, b: J(a, b).u_th,
        "u_tt": lambda a, b: J(a, b).u_tt,
        "u_ttheta": lambda a, b: J(a, b).u_tth,
        "u_tt_perp": lambda a, b: _perp(spec, a, b, J(a, b).u_tt),
        "Omega1": lambda a, b: F(a, b).Omega1,
        "Omega2": lambda a, b: F(a, b).Omega2,
        "JOmega2": _field_J(spec, 2),
        "N1": lambda a, b: F(a, b).N1,
        "N2": lambda a, b: F(a, b).N2,
    }
    for i in range(spec.dim):
        out[f"v{i + 1}_perp"] = _field_vperp(spec, i)
    return out


def descent_table(spec, t, th) -> dict:
    """{field: (expected sign, residual)} for X(-t, theta + pi) = sign X(t, theta)."""
    cover = spec.cover
    if not (cover.family == "fs" and (cover.k, cover.l) == (2, 1)):
        raise NotApplicable("the deck involution lives on the (2,1) annulus only")
    cover = cover.with_scaling(spec.scaling)
    table = {}
    for name, fn in descent_fields(cover).items():
        a, b = fn(t, th), fn(-t, th + math.pi)
        eps = DESCENT_SIGNS.get(name, 1)  # v_i^perp are invariant
        table[name] = (eps, _rel(b - eps * a, a, b))
    return table


def _descent(spec, t, th):
    return max(r for _, r in descent_table(spec, t, th).values())


_CHECKS = {
    "C1_conformal": (_c1_conformal, "interior", TOL_ALGEBRAIC),
    "C1_harmonic": (_c1_harmonic, "interior", TOL_ALGEBRAIC),
    "C2_uzz": (_c2_uzz, "interior", TOL_FD1),
    "C2_Xz": (_c2_xz, "interior", TOL_FD1),
    "C3_holomorphic": (_c3_holomorphic, "interior", TOL_FD1),
    "C3_curvature_commutator": (_c3_commutator, "interior", TOL_FD2),
    "C4_laplacian": (_c4_laplacian, "interior", TOL_FD2),
    "C5_frame": (_c5_frame, "interior", TOL_ALGEBRAIC),
    "C5_b12_boundary": (_c5_boundary, "boundary", TOL_BOUNDARY),
    "C6_orthogonality": (_c6_orthogonality, "interior", TOL_ALGEBRAIC),
    "C6_laplace_omega": (_c6_laplace_omega, "interior", TOL_FD2),
    "C6_simons": (_c6_simons, "interior", TOL_ALGEBRAIC),
    "P_dot_constant": (_p_dot, "interior", TOL_BOUNDARY),
    "P_vperp_jacobi": (_p_vperp, "interior", TOL_FD2),
    "T_mainintro_cross_terms": (_t_cross_terms, "boundary", TOL_FD1),
    "T_mainintro_boundary_integrals": (_t_boundary_integrals, "boundary", TOL_BOUNDARY),
    "T_indFS_J_jacobi": (_t_j_jacobi, "interior", TOL_FD2),
    "descent": (_descent, "interior", TOL_ALGEBRAIC),
}


def default_tolerance(claim_id: str) -> float:
    if claim_id not in _CHECKS:
        raise LabelError(f"unknown claim id {claim_id!r}")
    return _CHECKS[claim_id][2]


def _check_applicable(spec, claim_id):
    if claim_id == "T_indFS_J_jacobi" and spec.dim != 4:
        raise NotApplicable("J needs a two-dimensional normal bundle")
    if claim_id == "descent":
        c = spec.cover
        if not (c.family == "fs" and (c.k, c.l) == (2, 1)):
            raise NotApplicable("the deck involution lives on the (2,1) annulus only")


def run_check(spec: SurfaceSpec, claim_id: str, samples: int = DEFAULT_SAMPLES,
              tol: float | None = None, *, seed: int = 0, rotate: float = 0.0) -> ClaimCheck:
    """Evaluate one identity; raises NotApplicable on a dimension mismatch.

    Boundary claims use ``samples`` points on each boundary circle.
    ``rotate`` shifts every sample angle, for symmetry tests.
    """
    if claim_id not in _CHECKS:
        raise LabelError(f"unknown claim id {claim_id!r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    fn, where, default_tol = _CHECKS[claim_id]
    tol = default_tol if tol is None else float(tol)
    _check_applicable(spec, claim_id)
    pts = (boundary_points if where == "boundary" else sample_points)(spec, samples, seed, rotate)
    with np.errstate(invalid="ignore", divide="ignore"):
        res = fn(spec, *pts)
    if not math.isfinite(res):
        res = math.inf
    return ClaimCheck(claim_id, res, samples, tol, PASS if res < tol else FAIL)


def run_all(spec: SurfaceSpec, seed: int = 0, samples: int = DEFAULT_SAMPLES) -> list[ClaimCheck]:
    """Every claim in fixed order; inapplicable ones carry verdict 'not_applicable'."""
    out = []
    for cid in CLAIM_IDS:
        try:
            out.append(run_check(spec, cid, samples, seed=seed))
        except NotApplicable:
            out.append(ClaimCheck(cid, math.nan, 0, default_tolerance(cid), NA))
    return out


def aggregate_verdict(checks) -> str:
    return PASS if all(c.verdict != FAIL for c in checks) else FAIL
