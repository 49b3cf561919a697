"""Second variation of area on normal sections: Morse index, nullity, energy index.

The form is used in its integrated-by-parts shape

    S(X, X) = int |grad^perp X|^2 - B(X).X dv - int_{boundary} |X|^2 ds.

In the conformal coordinates (t, theta) the Dirichlet part is conformally
invariant, the Simons part is 8 e^{-2 omega} ((Omega_1.X)^2 + (Omega_2.X)^2)
per unit (t, theta) area and the boundary measure is e^{omega(T)} dtheta.

Sections are expanded as X = f1 N_1 + f2 N_2.  All coefficients depend on t
only and alpha_t = 0, so a theta-frequency m couples just the pair
(f1 = a(t) cos m theta, f2 = d(t) sin m theta):

    |grad^perp X|^2 -> a'^2 + d'^2 + (m a + alpha d)^2 + (m d + alpha a)^2,

with alpha = alpha_theta odd in t.  This splits further by the t-parity of
``a`` (``d`` then has the opposite parity).  The partner pair
(a sin, d cos) gives the same block, hence multiplicity two for m >= 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial import legendre  # Gauss nodes only
from scipy import linalg

from . import finite_diff as fd
from . import steklov
from .errors import ConfigError, EigenFailure, ScalingError
from .normal_frame import NormalSection, connection_coefficients, local_frame, special_section
from .surface_zoo import TWO_PI, SurfaceSpec, project_normal, solve_boundary_parameter

MASSES = ("interior", "identity", "interior+boundary")


@dataclass(frozen=True)
class DiscretizationConfig:
    n_theta_max: int = 8
    n_t: int = 48
    quad_order: int = 96
    zero_band: float = 1e-5
    refinement_levels: int = 2
    n_theta_quad: int = 64

    def __post_init__(self):
        if self.n_t < 8:
            raise ConfigError("n_t must be at least 8")
        if self.quad_order < 2 * self.n_t:
            raise ConfigError("quad_order must be at least 2 * n_t")
        if self.n_theta_max < 1 or self.refinement_levels < 1:
            raise ConfigError("n_theta_max and refinement_levels must be positive")
        if not self.zero_band > 0:
            raise ConfigError("zero_band must be positive")

    def refined(self, level: int) -> "DiscretizationConfig":
        """Nested refinement: level 0 is the config itself."""
        n_t = self.n_t + (self.n_t // 2) * level
        return replace(self, n_t=n_t, n_theta_max=self.n_theta_max + 2 * level,
                       quad_order=max(self.quad_order, 2 * n_t) * (n_t + self.n_t) // (2 * self.n_t))

    def as_dict(self) -> dict:
        return {"n_theta_max": self.n_theta_max, "n_t": self.n_t, "quad_order": self.quad_order,
                "zero_band": self.zero_band, "refinement_levels": self.refinement_levels}


@dataclass(frozen=True)
class Sector:
    """One decoupled block: theta-frequency, t-parity of f1, scalar or frame."""

    frequency: int
    parity: str
    kind: str  # "normal" (codim 1), "frame" (codim 2) or "scalar" (energy form)

    @property
    def multiplicity(self) -> int:
        return 1 if self.frequency == 0 else 2

    def label(self) -> str:
        return f"{self.kind}:m={self.frequency}:{self.parity}"


def sectors(spec: SurfaceSpec, cfg: DiscretizationConfig, kind: str | None = None) -> list[Sector]:
    """Sectors in deterministic order; the quotient keeps deck-invariant ones.

    Deck invariance X(t, theta) = X(-t, theta + pi) with N_1 even and N_2 odd
    forces f1 (and scalar functions) to have t-parity (-1)^m.
    """
    if kind is None:
        kind = "normal" if spec.codim == 1 else "frame"
    out = []
    for m in range(cfg.n_theta_max + 1):
        for parity in ("even", "odd"):
            if spec.quotient and not steklov.deck_invariant(m, parity):
                continue
            out.append(Sector(m, parity, kind))
    return out


# -- Galerkin machinery --------------------------------------------------------

def _other(parity):
    return "odd" if parity == "even" else "even"


def _legendre_all(deg_max: int, x):
    """P_0..P_deg_max and their derivatives at x by the three-term recurrence."""
    P = np.empty((deg_max + 1,) + x.shape)
    dP = np.empty_like(P)
    P[0], dP[0] = 1.0, 0.0
    if deg_max >= 1:
        P[1], dP[1] = x, 1.0
    for n in range(1, deg_max):
        P[n + 1] = ((2 * n + 1) * x * P[n] - n * P[n - 1]) / (n + 1)
        dP[n + 1] = dP[n - 1] + (2 * n + 1) * P[n]
    return P, dP


def legendre_basis(n: int, parity: str, t, T: float):
    """Orthonormal (in L^2(-T, T)) Legendre polynomials of one parity.

    Returns (values, derivatives), each shaped (n, len(t)).
    """
    x = np.asarray(t, dtype=float) / T
    start = 0 if parity == "even" else 1
    degs = np.arange(start, start + 2 * n, 2)
    P, dP = _legendre_all(int(degs[-1]), x)
    norm = np.sqrt((2 * degs + 1) / (2 * T)).reshape((-1,) + (1,) * x.ndim)
    return P[degs] * norm, dP[degs] * norm / T


@dataclass(frozen=True)
class _Coefficients:
    t: np.ndarray
    w: np.ndarray
    e2w: np.ndarray
    alpha: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    ew_T: float
    T: float


@lru_cache(maxsize=64)
def _coefficients(spec: SurfaceSpec, quad_order: int) -> _Coefficients:
    if spec.scaling != "unit":
        raise ScalingError("the free boundary term -|X|^2 needs the boundary on the unit sphere")
    T = solve_boundary_parameter(spec).T
    x, w = legendre.leggauss(quad_order)
    t, w = T * x, T * w
    f = local_frame(spec, t, np.zeros_like(t))
    e2w = f.e2w
    # Simons potential per unit (t, theta) area: 8 e^{-2 omega} (Omega_j . N_a)^2
    O1N1 = np.sum(f.Omega1 * f.N1, axis=-1)
    O2N1 = np.sum(f.Omega2 * f.N1, axis=-1)
    if spec.codim == 1:
        V1 = 8.0 / e2w * (O1N1 ** 2 + O2N1 ** 2)
        V2 = np.zeros_like(V1)
        alpha = np.zeros_like(V1)
    else:
        V1 = 8.0 / e2w * O1N1 ** 2
        V2 = 8.0 / e2w * np.sum(f.Omega2 * f.N2, axis=-1) ** 2
        alpha = connection_coefficients(spec, t)[1]
    return _Coefficients(t, w, e2w, alpha, V1, V2, steklov.boundary_length_factor(spec), T)


def _gram(P, Q, weight):
    return (P * weight) @ Q.T


def assemble_stability_form(spec: SurfaceSpec, cfg: DiscretizationConfig, sector: Sector,
                            mass: str = "interior"):
    """Form matrix A and mass matrix M of S restricted to a sector.

    Unknowns are Legendre coefficients of ``a`` (then ``d`` for frame
    sectors).  The theta integral is included, so x^T A x = S(X, X).
    """
    if mass not in MASSES:
        raise ConfigError(f"mass must be one of {MASSES}")
    c = _coefficients(spec, cfg.quad_order)
    m = sector.frequency
    ang = TWO_PI if m == 0 else math.pi
    ends = np.array([c.T, -c.T])
    Pa, dPa = legendre_basis(cfg.n_t, sector.parity, c.t, c.T)
    Ba, _ = legendre_basis(cfg.n_t, sector.parity, ends, c.T)
    if sector.kind == "scalar":
        A = _gram(dPa, dPa, c.w) + _gram(Pa, Pa, m * m * c.w) - c.ew_T * Ba @ Ba.T
        Mi = _gram(Pa, Pa, c.e2w * c.w)
        Mb = c.ew_T * Ba @ Ba.T
    elif sector.kind == "normal":
        A = _gram(dPa, dPa, c.w) + _gram(Pa, Pa, (m * m - c.V1) * c.w) - c.ew_T * Ba @ Ba.T
        Mi = _gram(Pa, Pa, c.e2w * c.w)
        Mb = c.ew_T * Ba @ Ba.T
    else:
        pd = _other(sector.parity)
        Pd, dPd = legendre_basis(cfg.n_t, pd, c.t, c.T)
        Bd, _ = legendre_basis(cfg.n_t, pd, ends, c.T)
        # (m a + alpha d)^2 + (m d + alpha a)^2 = (m^2 + alpha^2)(a^2 + d^2) + 4 m alpha a d
        base = m * m + c.alpha ** 2
        Aaa = _gram(dPa, dPa, c.w) + _gram(Pa, Pa, (base - c.V1) * c.w) - c.ew_T * Ba @ Ba.T
        Add = _gram(dPd, dPd, c.w) + _gram(Pd, Pd, (base - c.V2) * c.w) - c.ew_T * Bd @ Bd.T
        Aad = _gram(Pa, Pd, 2.0 * m * c.alpha * c.w)
        A = np.block([[Aaa, Aad], [Aad.T, Add]])
        Z = np.zeros_like(Aad)
        Mi = np.block([[_gram(Pa, Pa, c.e2w * c.w), Z], [Z.T, _gram(Pd, Pd, c.e2w * c.w)]])
        Mb = c.ew_T * np.block([[Ba @ Ba.T, Z], [Z.T, Bd @ Bd.T]])
    A = ang * 0.5 * (A + A.T)
    Mi = ang * Mi
    if mass == "interior":
        M = Mi
    elif mass == "identity":
        M = np.eye(A.shape[0])
    else:
        M = Mi + ang * Mb
    return A, 0.5 * (M + M.T)


def sector_section(spec: SurfaceSpec, cfg: DiscretizationConfig, sector: Sector, x,
                   partner: bool = False) -> NormalSection:
    """The normal section represented by coefficient vector ``x`` in a sector.

    ``partner=True`` builds the rotated pair (a sin, -d cos) that carries
    the same block.
    """
    T = solve_boundary_parameter(spec).T
    n = cfg.n_t
    x = np.asarray(x, dtype=float)
    m = sector.frequency

    def coeffs(t, th):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        Pa, _ = legendre_basis(n, sector.parity, flat, T)
        a = (x[:n] @ Pa).reshape(t.shape)
        cos, sin = np.cos(m * th), np.sin(m * th)
        if m == 0:
            # both coefficients are theta-independent in the m = 0 block
            sin = np.ones_like(cos)
        elif partner:
            cos, sin = sin, -cos
        if sector.kind != "frame":
            return (a * cos)[..., None]
        Pd, _ = legendre_basis(n, _other(sector.parity), flat, T)
        d = (x[n:] @ Pd).reshape(t.shape)
        return np.stack([a * cos, d * sin], axis=-1)

    return NormalSection(coeffs, f"sector[{sector.label()}]")


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class Eigenvalue:
    value: float
    frequency: int
    parity: str
    sector: str
    multiplicity: int


@dataclass
class SpectralReport:
    eigenvalues: list  # sorted Eigenvalue entries
    morse_index: int
    nullity_band_count: int
    converged: bool
    zero_band_abs: float
    scale: float
    uperp_rayleigh: float
    levels: list = field(default_factory=list)  # per refinement level summaries
    sylvester: dict = field(default_factory=dict)  # mass choice -> negative count
    sector_counts: dict = field(default_factory=dict)  # sector label -> (neg, null, total)
    tail_min: float = float("nan")


def _solve(A, M):
    try:
        return linalg.eigh(A, M, eigvals_only=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc


def _uperp_rayleigh(spec, cfg):
    """Rayleigh quotient of the Galerkin projection of u^perp (exactly zero in the limit)."""
    sec = Sector(0, "even", "normal" if spec.codim == 1 else "frame")
    A, M = assemble_stability_form(spec, cfg, sec)
    c = _coefficients(spec, cfg.quad_order)
    f = local_frame(spec, c.t, np.zeros_like(c.t))
    Pa, _ = legendre_basis(cfg.n_t, "even", c.t, c.T)
    rhs = [Pa @ (c.w * c.e2w * np.sum(f.jet.u * f.N1, axis=-1))]
    if spec.codim == 2:
        Pd, _ = legendre_basis(cfg.n_t, "odd", c.t, c.T)
        rhs.append(Pd @ (c.w * c.e2w * np.sum(f.jet.u * f.N2, axis=-1)))
    b = TWO_PI * np.concatenate(rhs)
    x = linalg.solve(M, b, assume_a="pos")
    return float(x @ A @ x / (x @ M @ x))


def _level(spec, cfg, mass="interior"):
    entries, blocks = [], []
    for sec in sectors(spec, cfg):
        A, M = assemble_stability_form(spec, cfg, sec, mass)
        ev = _solve(A, M)
        blocks.append((sec, ev))
        entries += [Eigenvalue(float(v), sec.frequency, sec.parity, sec.kind, sec.multiplicity) for v in ev]
    entries.sort(key=lambda e: (e.value, e.frequency, e.parity))
    return entries, blocks


def _count(blocks, band):
    neg = sum(s.multiplicity * int(np.sum(ev < -band)) for s, ev in blocks)
    null = sum(s.multiplicity * int(np.sum(np.abs(ev) <= band)) for s, ev in blocks)
    return neg, null


def _band(blocks, cfg, rq):
    lo = min(float(ev[0]) for _, ev in blocks)
    scale = max(1.0, abs(lo))
    return max(cfg.zero_band * scale, 10.0 * abs(rq)), scale


def morse_index(spec: SurfaceSpec, cfg: DiscretizationConfig | None = None) -> SpectralReport:
    """Negative and near-zero eigenvalue counts of S over all sectors.

    Counts are repeated on ``cfg.refinement_levels`` nested refinements;
    ``converged`` is true when they agree.  The negative count is also
    recomputed with the other mass matrices (inertia is mass independent).
    """
    cfg = cfg or DiscretizationConfig()
    rq = _uperp_rayleigh(spec, cfg)
    entries, blocks = _level(spec, cfg)
    band, scale = _band(blocks, cfg, rq)
    neg, null = _count(blocks, band)
    levels = [{"n_t": cfg.n_t, "n_theta_max": cfg.n_theta_max, "morse_index": neg, "nullity_band": null}]
    for lev in range(1, cfg.refinement_levels):
        rc = cfg.refined(lev)
        _, b = _level(spec, rc)
        bd, _ = _band(b, rc, rq)
        n2, z2 = _count(b, bd)
        levels.append({"n_t": rc.n_t, "n_theta_max": rc.n_theta_max, "morse_index": n2, "nullity_band": z2})
    converged = all(l["morse_index"] == neg and l["nullity_band"] == null for l in levels)
    sylvester = {"interior": neg}
    for mass in MASSES[1:]:
        _, b = _level(spec, cfg, mass)
        # same relative band, measured in that mass's units
        bd, _ = _band(b, cfg, 0.0)
        sylvester[mass] = _count(b, bd)[0]
    counts = {s.label(): (int(np.sum(ev < -band)), int(np.sum(np.abs(ev) <= band)), len(ev))
              for s, ev in blocks}
    tail = min(float(ev[0]) for s, ev in blocks if s.frequency == cfg.n_theta_max)
    return SpectralReport(entries, neg, null, converged, band, scale, rq, levels, sylvester, counts, tail)


def inertia_negative_count(spec: SurfaceSpec, cfg: DiscretizationConfig | None = None,
                           shift: float = 0.0) -> int:
    """Eigenvalues below -shift, counted from the LDL^T inertia of A + shift M.

    No eigensolve is involved; by Sylvester's law the count of negative
    pivots equals the count of pencil eigenvalues below -shift.
    """
    cfg = cfg or DiscretizationConfig()
    total = 0
    for sec in sectors(spec, cfg):
        A, M = assemble_stability_form(spec, cfg, sec)
        _, D, _ = linalg.ldl(A + shift * M)
        ev = np.linalg.eigvalsh(D)  # block diagonal with 1x1 and 2x2 blocks
        total += sec.multiplicity * int(np.sum(ev < 0.0))
    return total


# -- energy index --------------------------------------------------------------

def robin_negative_count(spec: SurfaceSpec, cfg: DiscretizationConfig | None = None) -> int:
    """Negative count of q(f) = int |grad f|^2 - int_boundary f^2 (Galerkin)."""
    cfg = cfg or DiscretizationConfig()
    total = 0
    for sec in sectors(spec, cfg, kind="scalar"):
        A, M = assemble_stability_form(spec, cfg, sec)
        ev = _solve(A, M)
        scale = max(1.0, abs(float(ev[0])))
        total += sec.multiplicity * int(np.sum(ev < -1e-8 * scale))
    return total


def energy_index(spec: SurfaceSpec, cfg: DiscretizationConfig | None = None) -> int:
    """n times the number of Steklov eigenvalues below 1."""
    n_max = max(steklov.DEFAULT_N_MAX, (cfg or DiscretizationConfig()).n_theta_max)
    return spec.dim * steklov.spectral_index(spec, n_max=n_max).index


# -- quadrature of the bilinear form -------------------------------------------

@dataclass(frozen=True)
class FormTerms:
    dirichlet: float
    simons: float
    boundary: float

    @property
    def value(self) -> float:
        return self.dirichlet - self.simons - self.boundary

    @property
    def magnitude(self) -> float:
        return abs(self.dirichlet) + abs(self.simons) + abs(self.boundary)


@lru_cache(maxsize=16)
def _grid(spec, quad_order, n_theta):
    T = solve_boundary_parameter(spec).T
    x, w = legendre.leggauss(quad_order)
    th = np.arange(n_theta) * (TWO_PI / n_theta)
    tt, hh = np.meshgrid(T * x, th, indexing="ij")
    return tt, hh, T * w, TWO_PI / n_theta, th, T


def _field_data(spec, X: NormalSection, tt, hh):
    F = lambda a, b: X.ambient(spec, a, b)
    return F(tt, hh), fd.d1(F, tt, hh, 0), fd.d1(F, tt, hh, 1)


def quadratic_form_terms(spec: SurfaceSpec, X: NormalSection, Y: NormalSection,
                         cfg: DiscretizationConfig | None = None) -> FormTerms:
    """Dirichlet, Simons and boundary parts of S(X, Y) by quadrature.

    Works on ambient vector fields only, so it is independent of the frame
    reduction used by :func:`assemble_stability_form`.
    """
    cfg = cfg or DiscretizationConfig()
    tt, hh, wt, wth, th, T = _grid(spec, cfg.quad_order, cfg.n_theta_quad)
    f = local_frame(spec, tt, hh)
    j = f.jet
    X0, Xt, Xh = _field_data(spec, X, tt, hh)
    if Y is X:
        Y0, Yt, Yh = X0, Xt, Xh
    else:
        Y0, Yt, Yh = _field_data(spec, Y, tt, hh)
    dot = lambda a, b: np.sum(a * b, axis=-1)
    dens = dot(project_normal(j, Xt), project_normal(j, Yt)) + dot(project_normal(j, Xh), project_normal(j, Yh))
    simons = 0.0
    for second, weight in ((j.u_tt, 1.0), (j.u_tth, 2.0), (j.u_thth, 1.0)):
        b = project_normal(j, second)
        simons = simons + weight * dot(b, X0) * dot(b, Y0)
    simons = simons / f.e2w
    W = wt[:, None] * wth
    bnd = 0.0
    for s in (T, -T):
        fb = local_frame(spec, np.full_like(th, s), th)
        xb = X.ambient(spec, np.full_like(th, s), th)
        yb = xb if Y is X else Y.ambient(spec, np.full_like(th, s), th)
        bnd += float(np.sum(np.sqrt(fb.e2w) * dot(xb, yb)) * wth)
    return FormTerms(float(np.sum(W * dens)), float(np.sum(W * simons)), bnd)


def quadratic_form_eval(spec: SurfaceSpec, X: NormalSection, Y: NormalSection,
                        cfg: DiscretizationConfig | None = None) -> float:
    """S(X, Y)."""
    return quadratic_form_terms(spec, X, Y, cfg).value


def l2_inner(spec: SurfaceSpec, X: NormalSection, Y: NormalSection,
             cfg: DiscretizationConfig | None = None, weight=None) -> float:
    """int X.Y dv_g, optionally times weight(local_frame)."""
    cfg = cfg or DiscretizationConfig()
    tt, hh, wt, wth, _, _ = _grid(spec, cfg.quad_order, cfg.n_theta_quad)
    f = local_frame(spec, tt, hh)
    dens = np.sum(X.ambient(spec, tt, hh) * Y.ambient(spec, tt, hh), axis=-1) * f.e2w
    if weight is not None:
        dens = dens * weight(f)
    return float(np.sum(wt[:, None] * wth * dens))


def gram_matrix(spec: SurfaceSpec, sections, cfg: DiscretizationConfig | None = None) -> np.ndarray:
    n = len(sections)
    G = np.empty((n, n))
    for i in range(n):
        for k in range(i, n):
            G[i, k] = G[k, i] = l2_inner(spec, sections[i], sections[k], cfg)
    return G


def numerical_rank(G: np.ndarray, rtol: float = 1e-8) -> int:
    d = np.sqrt(np.diag(G))
    C = G / np.outer(d, d)
    ev = np.linalg.eigvalsh(C)
    return int(np.sum(ev > rtol * ev.max()))


def boundary_length(spec: SurfaceSpec) -> float:
    """Length of both boundary circles."""
    c = _coefficients(spec, 2)
    return 2.0 * TWO_PI * c.ew_T


# -- inequality chain ----------------------------------------------------------

DIM_MODULI = 1  # annulus and Moebius band: moduli space is a ray


@dataclass(frozen=True)
class Inequality:
    name: str
    statement: str
    lhs: int
    rhs: int
    holds: bool


@dataclass
class IndexChainReport:
    ind: int
    ind_S: int
    ind_E: int
    dim_moduli: int
    inequalities: list
    nullity_band: int = 0

    @property
    def ok(self) -> bool:
        return all(q.holds for q in self.inequalities)


def _ineq(name, statement, lhs, op, rhs):
    holds = lhs >= rhs if op == ">=" else lhs <= rhs
    return Inequality(name, f"{statement}: {lhs} {op} {rhs}", int(lhs), int(rhs), bool(holds))


def inequality_report(spec: SurfaceSpec, cfg: DiscretizationConfig | None = None,
                      report: SpectralReport | None = None) -> IndexChainReport:
    cfg = cfg or DiscretizationConfig()
    report = report or morse_index(spec, cfg)
    n = spec.dim
    ind = report.morse_index
    ind_s = steklov.spectral_index(spec).index
    ind_e = energy_index(spec, cfg)
    dm = DIM_MODULI
    qs = [
        _ineq("ind_ge_n", "Ind >= n (not a plane disk)", ind, ">=", n),
        _ineq("ind_e_le_n_ind_s", "Ind_E <= n Ind_S", ind_e, "<=", n * ind_s),
        _ineq("ind_le_ind_e_plus_moduli", "Ind <= Ind_E + dim M", ind, "<=", ind_e + dm),
        _ineq("ind_le_n_ind_s_plus_moduli", "Ind <= n Ind_S + dim M", ind, "<=", n * ind_s + dm),
        _ineq("n_ind_s_plus_moduli_ge_n", "n Ind_S + dim M >= n", n * ind_s + dm, ">=", n),
    ]
    if spec.codim == 1:
        qs += [
            _ineq("hypersurface_ind_ge_n_plus_1", "Ind >= n + 1 (hypersurface)", ind, ">=", n + 1),
            _ineq("hypersurface_ind_ge_ind_s_plus_n", "Ind >= Ind_S + n (hypersurface)", ind, ">=", ind_s + n),
            _ineq("three_ind_s_plus_moduli_ge_4", "3 Ind_S + dim M >= 4", 3 * ind_s + dm, ">=", 4),
        ]
    return IndexChainReport(ind, ind_s, ind_e, dm, qs, report.nullity_band_count)
