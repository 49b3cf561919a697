import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbindex.errors import LabelError, NonConstant, NotApplicable
from fbindex.normal_frame import (
    alpha_from_mu,
    build_frame,
    connection_coefficients,
    custom_section,
    deck_parity_table,
    hopf_constant,
    local_frame,
    mu,
    second_form,
    simons_operator,
    special_section,
)
from fbindex.surface_zoo import SurfaceSpec, jet2, solve_boundary_parameter

from conftest import ALL_SURFACES, CATENOID, FS21, FS31, MOBIUS
from oracles import HOPF_CATENOID, HOPF_FS, HOPF_FS21_RAW

FOUR_D = [s for s in ALL_SURFACES if s.dim == 4]


@given(st.sampled_from(ALL_SURFACES), st.floats(-1, 1), st.floats(0, 2 * math.pi))
def test_frame_is_orthonormal(spec, x, th):
    t = x * solve_boundary_parameter(spec).T
    f = local_frame(spec, t, th)
    vecs = [f.e1, f.e2] + f.normals()
    G = np.array([[a @ b for b in vecs] for a in vecs])
    assert np.allclose(G, np.eye(len(vecs)), atol=1e-12)
    if spec.dim == 4:
        assert np.linalg.det(np.stack(vecs)) > 0.99


@pytest.mark.parametrize("kl", sorted(HOPF_FS))
def test_hopf_constant_fs_unit(kl):
    h = hopf_constant(SurfaceSpec.fraser_sargent(*kl))
    # stored value is Omega . Omega = (|u_tt^perp|^2 - |u_ttheta^perp|^2) / 4
    assert 4 * h.value == pytest.approx(HOPF_FS[kl], rel=1e-9)
    assert h.max_rel_deviation < 1e-8


@pytest.mark.parametrize("q", sorted(HOPF_CATENOID))
def test_hopf_constant_catenoid(q):
    h = hopf_constant(SurfaceSpec.catenoid(q))
    assert 4 * h.value == pytest.approx(HOPF_CATENOID[q], rel=1e-9)


def test_hopf_constant_raw_fs21_is_twelve():
    assert 4 * hopf_constant(FS21.with_scaling("raw")).value == pytest.approx(HOPF_FS21_RAW, abs=1e-9)


def test_hopf_constancy_tolerance_can_fail():
    with pytest.raises(NonConstant):
        hopf_constant(FS31, tol=0.0)


@given(st.sampled_from(FOUR_D), st.floats(-1, 1), st.floats(0, 2 * math.pi))
def test_omega_components_via_uzz(spec, x, th):
    # Omega = (u_zz)^perp, u_zz = (u_tt - u_thth - 2i u_tth)/4
    t = x * solve_boundary_parameter(spec).T
    f = local_frame(spec, t, th)
    j = jet2(spec, t, th)
    sf = second_form(spec, t, th)
    e2w = j.u_t @ j.u_t
    assert np.allclose(f.Omega1, 0.5 * e2w * sf.b11, atol=1e-12)
    assert np.allclose(f.Omega2, -0.5 * e2w * sf.b12, atol=1e-12)
    assert np.allclose(sf.b11 + sf.b22, 0, atol=1e-12)
    assert abs(f.Omega1 @ f.Omega2) < 1e-12


def test_simons_operator_on_omegas():
    t, th = np.array([0.1, -0.4]), np.array([0.3, 2.0])
    sf = second_form(FS21, t, th)
    e4w = (jet2(FS21, t, th).u_t ** 2).sum(-1) ** 2
    for O in (sf.Omega1, sf.Omega2):
        rhs = 8 / e4w[:, None] * (O * O).sum(-1)[:, None] * O
        assert np.allclose(simons_operator(sf, O), rhs, atol=1e-12)


@pytest.mark.parametrize("spec", [FS21, FS31], ids=lambda s: s.label())
def test_connection_relation_and_parities(spec):
    T = solve_boundary_parameter(spec).T
    t = np.linspace(-0.9 * T, 0.9 * T, 9)
    ff = build_frame(spec, t, np.linspace(0, 2 * math.pi, 8, endpoint=False))
    # grad_z N_1 = i mu_z N_2: alpha_t = 0, alpha_theta = -mu'
    assert np.max(np.abs(ff.alpha_t)) < 1e-8
    assert ff.alpha_relation_residual < 1e-8
    assert ff.alpha_theta_variation < 1e-8
    assert np.allclose(ff.alpha_theta, -ff.alpha_theta[::-1], atol=1e-8)
    assert np.allclose(ff.mu, ff.mu[::-1], atol=1e-10)
    assert np.all(ff.mu > 0)


def test_mu_vanishes_on_boundary():
    T = solve_boundary_parameter(FS21).T
    assert abs(float(mu(FS21, T))) < 1e-12
    a_t, a_th = alpha_from_mu(FS21, np.array([0.2]))
    assert a_t[0] == 0.0
    assert a_th[0] == pytest.approx(connection_coefficients(FS21, np.array([0.2]))[1][0], abs=1e-8)


def test_codim_one_has_no_connection():
    with pytest.raises(NotApplicable):
        connection_coefficients(CATENOID, np.array([0.1]))
    with pytest.raises(NotApplicable):
        build_frame(CATENOID, [0.0], [0.0])
    assert np.all(mu(CATENOID, np.array([0.1, 0.2])) == 0)


def test_deck_parity_table():
    expected = {"u_t": -1, "u_theta": 1, "u_tt": 1, "u_ttheta": -1, "u_tt_perp": 1, "N1": 1, "N2": -1}
    for spec in (FS21, MOBIUS):
        table = deck_parity_table(spec, n_pairs=50)
        for name, sign in expected.items():
            got, res = table[name]
            assert got == sign, name
            assert res < 1e-10
    with pytest.raises(NotApplicable):
        deck_parity_table(FS31)


def test_build_frame_reports_fs21_parities():
    ff = build_frame(FS21, [0.1, 0.2], [0.0, 1.0])
    assert (ff.parity1, ff.parity2) == (1, -1)


def test_special_section_labels():
    with pytest.raises(LabelError):
        special_section(CATENOID, "JOmega1")
    with pytest.raises(LabelError):
        special_section(FS21, "Vperp(5)")
    with pytest.raises(LabelError):
        special_section(FS21, "Nope")
    t, th = np.array([0.1, 0.5]), np.array([1.0, 2.0])
    f = local_frame(FS21, t, th)
    v = special_section(FS21, "Vperp(3)").ambient(FS21, t, th)
    assert np.allclose(v, np.eye(4)[2] - (f.e1[:, 2:3] * f.e1 + f.e2[:, 2:3] * f.e2), atol=1e-12)
    # Hopf normalization: Omega~ . Omega~ = 1
    O1 = special_section(FS21, "Omega1").ambient(FS21, t, th)
    O2 = special_section(FS21, "Omega2").ambient(FS21, t, th)
    assert np.allclose((O1 * O1).sum(-1) - (O2 * O2).sum(-1), 1.0)
    J1 = special_section(FS21, "JOmega1").ambient(FS21, t, th)
    assert np.allclose((J1 * O1).sum(-1), 0, atol=1e-12)
    assert np.allclose((J1 * J1).sum(-1), (O1 * O1).sum(-1))


def test_custom_section_roundtrip():
    sec = custom_section(FS21, lambda t, th: np.stack([np.cos(th), 0 * th], -1), "c")
    t, th = np.array([0.0]), np.array([0.0])
    assert np.allclose(sec.ambient(FS21, t, th), local_frame(FS21, t, th).N1)
