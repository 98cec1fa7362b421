import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydssh.geometry import (
    MAGIC_ANGLE,
    ChainGeometry,
    CouplingMatrix,
    GeometryError,
    build_magic_chain,
    coupling_matrix,
    dipolar_coupling,
    load_geometry,
    nearest_neighbor_chain,
    perturb_edge,
    save_geometry,
)


def test_magic_angle_value():
    assert np.cos(MAGIC_ANGLE) ** 2 == pytest.approx(1 / 3, abs=1e-15)
    assert np.degrees(MAGIC_ANGLE) == pytest.approx(54.7356103172, abs=1e-9)


def test_coupling_vanishes_at_magic_angle():
    r = 10.0
    p = (r * np.cos(MAGIC_ANGLE), r * np.sin(MAGIC_ANGLE))
    assert abs(dipolar_coupling((0, 0), p, 0.0, 5000.0)) < 1e-12


def test_angular_sign_pattern():
    # positive below the magic angle, negative above it
    for deg, sign in [(0, 1), (30, 1), (54, 1), (56, -1), (70, -1), (90, -1)]:
        t = np.radians(deg)
        assert np.sign(dipolar_coupling((0, 0), (12 * np.cos(t), 12 * np.sin(t)), 0.0, 1000.0)) == sign


def test_coupling_along_axis_closed_form():
    assert dipolar_coupling((0, 0), (10, 0), 0.0, 1000.0) == pytest.approx(2.0, rel=1e-15)
    assert dipolar_coupling((0, 0), (0, 10), 0.0, 1000.0) == pytest.approx(-1.0, rel=1e-15)


@given(st.floats(1.0, 50.0), st.floats(0.0, 2 * np.pi), st.floats(0.5, 3.0))
def test_dipolar_scaling_and_rotation(R, angle, scale):
    p = (R * np.cos(angle), R * np.sin(angle))
    base = dipolar_coupling((0, 0), p, 0.3, 700.0)
    far = dipolar_coupling((0, 0), (scale * p[0], scale * p[1]), 0.3, 700.0)
    assert far == pytest.approx(base / scale**3, rel=1e-9, abs=1e-14)
    # rotating the positions and the axis together leaves the coupling unchanged
    rot = 0.77
    c, s = np.cos(rot), np.sin(rot)
    q = (c * p[0] - s * p[1], s * p[0] + c * p[1])
    assert dipolar_coupling((0, 0), q, 0.3 + rot, 700.0) == pytest.approx(base, rel=1e-9, abs=1e-12)
    # symmetric under exchange
    assert dipolar_coupling(p, (0, 0), 0.3, 700.0) == base


def test_magic_chain_hits_targets():
    g = build_magic_chain(14, 2.42, -0.92, "topological")
    J = coupling_matrix(g).values
    for k in range(13):
        target = -0.92 if k % 2 == 0 else 2.42
        assert abs(J[k, k + 1] - target) < 1e-9
    third = max(abs(J[k, k + 3]) for k in range(11))
    assert 0.1 <= third <= 0.3
    # same-sublattice couplings vanish
    for i in range(14):
        for j in range(i + 2, 14, 2):
            assert abs(J[i, j]) < 1e-12


def test_trivial_chain_starts_on_strong_link():
    J = coupling_matrix(build_magic_chain(8, 2.42, -0.92, "trivial")).values
    assert J[0, 1] == pytest.approx(2.42, abs=1e-9)
    assert J[1, 2] == pytest.approx(-0.92, abs=1e-9)


def test_unreachable_ratio_raises():
    with pytest.warns(UserWarning), pytest.raises(GeometryError):
        build_magic_chain(6, 1.0, -1e4)


@settings(max_examples=8)
@given(st.floats(1.5, 3.5), st.floats(-0.7, -0.1))
def test_magic_chain_property(J, ratio):
    Jp = ratio * J
    Jm = coupling_matrix(build_magic_chain(6, J, Jp)).values
    assert Jm[0, 1] == pytest.approx(Jp, abs=1e-9)
    assert Jm[1, 2] == pytest.approx(J, abs=1e-9)


def test_coupling_matrix_invariants():
    m = coupling_matrix(build_magic_chain(10, 2.42, -0.92))
    assert np.array_equal(m.values, m.values.T)
    assert np.all(np.diag(m.values) == 0)
    with pytest.raises(ValueError):
        m.values[0, 1] = 3.0
    with pytest.raises(ValueError):
        CouplingMatrix(np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]]))


def test_with_entry_and_subchain():
    m = nearest_neighbor_chain(6, 2.0, 1.0)
    m2 = m.with_entry(0, 2, 0.3)
    assert m2[0, 2] == m2[2, 0] == 0.3 and m[0, 2] == 0
    sub = m.subchain([True, False, True, True, True, True])
    assert sub.n == 5
    assert sub.sublattice == ("A", "A", "B", "A", "B")


def test_geometry_roundtrip(tmp_path):
    g = build_magic_chain(8, 2.42, -0.92)
    save_geometry(g, tmp_path / "g.json")
    g2 = load_geometry(tmp_path / "g.json")
    assert g2 == g
    assert np.array_equal(coupling_matrix(g2).values, coupling_matrix(g).values)
    data = json.loads((tmp_path / "g.json").read_text())
    assert set(data) == {"sites", "axis_deg", "d2_MHz_um3"}


def test_coincident_sites_rejected():
    with pytest.raises(GeometryError):
        ChainGeometry.from_positions([(0, 0), (0, 0)])


def test_perturb_edge_reaches_target():
    g = build_magic_chain(14, 2.42, -0.92)
    g2, rep = perturb_edge(g, 0.26)
    J = coupling_matrix(g2).values
    assert J[11, 13] == pytest.approx(0.26, abs=1e-9)
    assert rep.J_pp == pytest.approx(0.26, abs=1e-9)
    assert set(rep.before) == {(13, 14), (11, 14)}
    # only the last site moved
    assert np.array_equal(g2.positions[:-1], g.positions[:-1])
    same, rep0 = perturb_edge(g, 0.0)
    assert same is g and rep0.displacement_um == 0.0
