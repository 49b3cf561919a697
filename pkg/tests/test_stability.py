import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import legendre

from fbindex.errors import ConfigError, ScalingError
from fbindex.normal_frame import hopf_constant, special_section
from fbindex.stability import (
    DiscretizationConfig,
    Sector,
    assemble_stability_form,
    boundary_length,
    energy_index,
    gram_matrix,
    inequality_report,
    inertia_negative_count,
    l2_inner,
    legendre_basis,
    morse_index,
    numerical_rank,
    quadratic_form_eval,
    quadratic_form_terms,
    robin_negative_count,
    sector_section,
    sectors,
)
from fbindex.surface_zoo import SurfaceSpec

from conftest import CATENOID, FS21, FS31, MOBIUS
from oracles import IND_E, IND_S, MORSE, NULLITY_BAND

INDEX_SURFACES = {"catenoid(q=1)": CATENOID, "mobius": MOBIUS, "fs(k=2,l=1)": FS21, "fs(k=3,l=1)": FS31}
CFG = DiscretizationConfig()


@pytest.fixture(scope="module")
def reports():
    return {k: morse_index(s) for k, s in INDEX_SURFACES.items()}


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_legendre_basis_orthonormal(parity):
    T = 0.7
    x, w = legendre.leggauss(60)
    P, dP = legendre_basis(12, parity, T * x, T)
    assert np.allclose((P * (T * w)) @ P.T, np.eye(12), atol=1e-12)
    sign = 1 if parity == "even" else -1
    assert np.allclose(legendre_basis(12, parity, -T * x, T)[0], sign * P)
    h = 1e-6
    fd = (legendre_basis(12, parity, T * x + h, T)[0] - legendre_basis(12, parity, T * x - h, T)[0]) / (2 * h)
    assert np.allclose(dP, fd, rtol=1e-6, atol=1e-5)


def test_config_validation():
    with pytest.raises(ConfigError):
        DiscretizationConfig(n_t=4)
    with pytest.raises(ConfigError):
        DiscretizationConfig(n_t=48, quad_order=50)
    with pytest.raises(ConfigError):
        DiscretizationConfig(zero_band=0)
    r = CFG.refined(1)
    assert r.n_t > CFG.n_t and r.n_theta_max > CFG.n_theta_max and r.quad_order >= 2 * r.n_t
    with pytest.raises(ConfigError):
        assemble_stability_form(FS21, CFG, Sector(0, "even", "frame"), mass="lumped")


def test_raw_scaling_rejected():
    with pytest.raises(ScalingError):
        assemble_stability_form(FS21.with_scaling("raw"), CFG, Sector(1, "even", "frame"))


def test_quotient_keeps_deck_invariant_sectors():
    full = sectors(FS21, CFG)
    quot = sectors(MOBIUS, CFG)
    assert len(quot) * 2 == len(full)
    assert all((s.parity == "even") == (s.frequency % 2 == 0) for s in quot)


@pytest.mark.parametrize("spec, sector", [
    (CATENOID, Sector(0, "even", "normal")),
    (CATENOID, Sector(2, "odd", "normal")),
    (FS21, Sector(0, "even", "frame")),
    (FS21, Sector(1, "odd", "frame")),
    (FS31, Sector(3, "even", "frame")),
], ids=lambda x: x.label() if hasattr(x, "label") else str(x))
def test_galerkin_matches_ambient_quadrature(spec, sector):
    # the reduced Galerkin form against the frame-free ambient evaluation
    cfg = DiscretizationConfig(n_t=10, quad_order=96)
    A, M = assemble_stability_form(spec, cfg, sector)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(A.shape[0]) / (1 + np.arange(A.shape[0]) % cfg.n_t) ** 2
    X = sector_section(spec, cfg, sector, x)
    terms = quadratic_form_terms(spec, X, X, cfg)
    assert x @ A @ x == pytest.approx(terms.value, abs=1e-8 * terms.magnitude)
    assert x @ M @ x == pytest.approx(l2_inner(spec, X, X, cfg), rel=1e-10)
    if sector.frequency > 0:
        Y = sector_section(spec, cfg, sector, x, partner=True)
        assert quadratic_form_eval(spec, Y, Y, cfg) == pytest.approx(terms.value, abs=1e-8 * terms.magnitude)
        assert abs(quadratic_form_eval(spec, X, Y, cfg)) < 1e-8 * terms.magnitude


@pytest.mark.parametrize("label", sorted(MORSE))
def test_morse_index_counts(reports, label):
    rep = reports[label]
    assert rep.morse_index == MORSE[label]
    assert rep.nullity_band_count == NULLITY_BAND[label]
    assert rep.converged
    assert set(rep.sylvester.values()) == {MORSE[label]}
    assert rep.tail_min > 0
    vals = [e.value for e in rep.eigenvalues]
    assert vals == sorted(vals)


@pytest.mark.parametrize("label", sorted(MORSE))
def test_inertia_count_agrees(reports, label):
    spec = INDEX_SURFACES[label]
    assert inertia_negative_count(spec, shift=reports[label].zero_band_abs) == MORSE[label]


@pytest.mark.parametrize("label", sorted(IND_S))
def test_energy_index_and_robin_oracle(label):
    spec = INDEX_SURFACES[label]
    assert energy_index(spec) == IND_E[label]
    # discrete Robin form (harmonic extension not assumed) has the same count
    assert robin_negative_count(spec) == IND_S[label]


@pytest.mark.parametrize("label", ["catenoid(q=1)", "mobius"])
def test_inequality_chain(reports, label):
    chain = inequality_report(INDEX_SURFACES[label], report=reports[label])
    assert chain.ok
    assert chain.ind_S == IND_S[label] and chain.ind_E == IND_E[label]
    names = {q.name for q in chain.inequalities}
    if label.startswith("catenoid"):
        assert "hypersurface_ind_ge_n_plus_1" in names


def test_morse_index_is_deterministic(reports):
    again = morse_index(MOBIUS)
    assert [e.value for e in again.eigenvalues] == [e.value for e in reports["mobius"].eigenvalues]


def test_uperp_rayleigh_tiny(reports):
    for rep in reports.values():
        assert abs(rep.uperp_rayleigh) < rep.zero_band_abs


@pytest.mark.parametrize("spec", [CATENOID, FS21], ids=lambda s: s.label())
def test_vperp_identities(spec):
    V = [special_section(spec, f"Vperp({i})") for i in range(1, spec.dim + 1)]
    O1 = special_section(spec, "Omega1")
    for v in V:
        t = quadratic_form_terms(spec, v, v)
        assert t.value == pytest.approx(-2 * l2_inner(spec, v, v), rel=1e-6)
    for a in V + [O1]:
        scale = quadratic_form_terms(spec, a, a).magnitude
        for b in V:
            if a is not b:
                assert abs(quadratic_form_eval(spec, a, b)) < 1e-8 * scale


@pytest.mark.parametrize("spec", [CATENOID, FS21, SurfaceSpec.fraser_sargent(3, 2)], ids=lambda s: s.label())
def test_omega1_form_value(spec):
    # -8 h int e^{-4 omega} |Omega~_1|^2 dv - Length; h = 1 after rescaling coordinates
    O1 = special_section(spec, "Omega1")
    h = hopf_constant(spec).value
    pred = -8 * h * l2_inner(spec, O1, O1, weight=lambda f: 1 / f.e2w ** 2) - boundary_length(spec)
    assert quadratic_form_eval(spec, O1, O1) == pytest.approx(pred, rel=1e-6)


def test_j_omega2_is_null_and_proportional_to_uperp():
    J2 = special_section(FS21, "JOmega2")
    t = quadratic_form_terms(FS21, J2, J2)
    assert abs(t.value) < 1e-6 * t.magnitude
    G = gram_matrix(FS21, [J2, special_section(FS21, "Uperp")])
    assert G[0, 1] / np.sqrt(G[0, 0] * G[1, 1]) == pytest.approx(-1.0, abs=1e-10)


def test_gram_ranks():
    six = [special_section(FS21, x) for x in ["Omega1", "JOmega1"] + [f"Vperp({i})" for i in range(1, 5)]]
    assert numerical_rank(gram_matrix(FS21, six)) == 6
    assert numerical_rank(gram_matrix(FS21, six + [special_section(FS21, "JOmega2")])) == 7
    cat = [special_section(CATENOID, x) for x in ["Omega1"] + [f"Vperp({i})" for i in range(1, 4)]]
    assert numerical_rank(gram_matrix(CATENOID, cat)) == 4


@given(st.sampled_from([Sector(0, "odd", "frame"), Sector(2, "even", "frame"), Sector(5, "odd", "frame")]),
       st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_rayleigh_quotient_bounded_by_lowest_eigenvalue(sector, coeffs):
    cfg = DiscretizationConfig(n_t=8, quad_order=48)
    A, M = assemble_stability_form(FS21, cfg, sector)
    x = np.zeros(A.shape[0])
    x[: len(coeffs)] = coeffs
    if not np.any(x):
        return
    lam = np.linalg.eigvalsh(np.linalg.solve(np.linalg.cholesky(M), np.linalg.solve(np.linalg.cholesky(M), A).T))
    assert x @ A @ x / (x @ M @ x) >= lam[0] - 1e-9 * max(1, abs(lam[0]))
