import math

import numpy as np
import pytest

from weylkit import matcore as mc
from weylkit.errors import UnitarityError, WeylkitError
from weylkit.kak import (
    CartanCoordinate,
    canonicalize,
    classify_template,
    core_matrix,
    k_t,
    kak_decompose,
    kak_recompose,
    locally_equivalent,
)

PI4 = math.pi / 4


def _check_canonical_identity(raw):
    coord, (l0, l1), (r0, r1), phase = canonicalize(raw)
    lhs = mc.kron(l0, l1) @ core_matrix(raw) @ mc.kron(r0, r1)
    rhs = phase * core_matrix(coord)
    assert np.abs(lhs - rhs).max() < 1e-9
    assert coord.in_chamber()
    return coord


def test_magic_basis_diagonalizes_pauli_pairs():
    md = mc.MAGIC.conj().T
    for axes, want in [("XX", [1, 1, -1, -1]), ("YY", [-1, 1, -1, 1]), ("ZZ", [1, -1, -1, 1])]:
        p = md @ mc.kron(*(getattr(mc, axes[0]),) * 2) @ mc.MAGIC
        assert np.abs(p - np.diag(want)).max() < 1e-12


def test_canonicalize_trivial():
    coord = _check_canonical_identity((math.pi / 8, math.pi / 16, math.pi / 32))
    assert coord.isclose(CartanCoordinate(math.pi / 8, math.pi / 16, math.pi / 32))


def test_canonicalize_shift_and_flip():
    coord = _check_canonical_identity((math.pi / 3, 0.0, 0.0))
    assert coord.isclose(CartanCoordinate(math.pi / 6, 0.0, 0.0))


def test_canonicalize_axis_conversion():
    coord = _check_canonical_identity((0.0, 0.0, math.pi / 8))
    assert coord.isclose(CartanCoordinate(math.pi / 8, 0.0, 0.0))


def test_canonicalize_random_triples():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        raw = rng.uniform(-2 * math.pi, 2 * math.pi, size=3)
        _check_canonical_identity(raw)


def test_canonicalize_boundary_sign_rule():
    coord = _check_canonical_identity((PI4, 0.2, -0.1))
    assert coord.nz >= 0
    assert coord.isclose(CartanCoordinate(PI4, 0.2, 0.1))


def test_coordinate_chamber_validation():
    with pytest.raises(WeylkitError):
        CartanCoordinate(1.0, 0.0, 0.0)
    with pytest.raises(WeylkitError):
        CartanCoordinate(PI4, 0.1, -0.05)


def test_kak_identity():
    f = kak_decompose(np.eye(4))
    assert f.coord.isclose(CartanCoordinate(0, 0, 0))
    assert mc.distance_up_to_phase(kak_recompose(f), np.eye(4)) < 1e-10


def test_kak_cx_coordinate():
    f = kak_decompose(mc.CX)
    assert f.coord.isclose(CartanCoordinate(PI4, 0, 0), atol=1e-9)
    assert mc.distance_up_to_phase(kak_recompose(f), mc.CX) < 1e-8


def test_kak_swap_coordinate():
    f = kak_decompose(mc.SWAP)
    assert f.coord.isclose(CartanCoordinate(PI4, PI4, PI4), atol=1e-9)
    assert mc.distance_up_to_phase(kak_recompose(f), mc.SWAP) < 1e-8


def test_kak_xx_rotation_family():
    for t in np.linspace(0.01, PI4, 9):
        f = kak_decompose(mc.rotation_2q("XX", t))
        assert f.coord.isclose(CartanCoordinate(t, 0, 0), atol=1e-9)
        tpl = classify_template(f.coord)
        assert tpl.tag == "da" and abs(tpl.tx - t) < 1e-9


def test_kak_round_trip_random():
    rng = np.random.default_rng(23)
    for _ in range(300):
        u = mc.haar_unitary(4, rng)
        f = kak_decompose(u)
        assert f.coord.in_chamber()
        assert mc.distance_up_to_phase(kak_recompose(f), u) < 1e-8
        for local in (f.a, f.b, f.c, f.d):
            assert abs(np.linalg.det(local) - 1) < 1e-10


def test_kak_exact_phase_reconstruction():
    rng = np.random.default_rng(29)
    for _ in range(50):
        u = mc.haar_unitary(4, rng)
        f = kak_decompose(u)
        assert np.abs(kak_recompose(f) - u).max() < 1e-7


def test_kak_g_branch_values():
    rng = np.random.default_rng(31)
    for _ in range(50):
        f = kak_decompose(mc.haar_unitary(4, rng))
        assert f.g_branch in (0.0, math.pi / 2)


def test_kak_rejects_non_unitary():
    with pytest.raises(UnitarityError):
        kak_decompose(np.ones((4, 4), dtype=complex))


def test_local_invariance():
    rng = np.random.default_rng(37)
    for _ in range(50):
        u = mc.haar_unitary(4, rng)
        locals4 = mc.kron(mc.haar_su(2, rng), mc.haar_su(2, rng))
        locals4b = mc.kron(mc.haar_su(2, rng), mc.haar_su(2, rng))
        v = locals4 @ u @ locals4b
        cu = kak_decompose(u).coord
        cv = kak_decompose(v).coord
        assert cu.isclose(cv, atol=1e-9)


def test_locally_equivalent_named_gates():
    assert locally_equivalent(mc.CX, mc.rotation_2q("XX", PI4))
    assert not locally_equivalent(mc.CX, mc.SWAP)


def test_kak_degenerate_inputs():
    # high-symmetry gates exercise the degenerate-spectrum retry path
    for u in (mc.SWAP, mc.CX, mc.kron(mc.H, mc.H), np.eye(4), mc.rotation_2q("ZZ", PI4)):
        f = kak_decompose(u)
        assert mc.distance_up_to_phase(kak_recompose(f), u) < 1e-8


def test_k_t_values():
    assert abs(k_t(mc.SWAP) - 3 * PI4) < 1e-9
    assert abs(k_t(np.eye(4))) < 1e-9
    assert abs(k_t(mc.CX) - PI4) < 1e-9


def test_classify_template():
    assert classify_template(CartanCoordinate(PI4, 0, 0)).tag == "da"
    assert classify_template(CartanCoordinate(PI4, math.pi / 8, 0)).tag == "db"
    assert classify_template(CartanCoordinate(PI4, math.pi / 8, math.pi / 16)).tag == "dc"
