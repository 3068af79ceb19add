import math

import numpy as np
import pytest

from weylkit import matcore as mc
from weylkit.calib import (
    apply_rule,
    da_forward,
    da_invert,
    da_solve_exact,
    db_forward,
    db_invert,
    rule_lhs,
    seq_matrix,
)
from weylkit.errors import UnreachableTargetError
from weylkit.kak import CartanCoordinate, canonicalize, core_matrix, kak_decompose

PI2 = math.pi / 2
PI4 = math.pi / 4
PI8 = math.pi / 8


def _z1(a):
    return mc.kron(mc.I2, mc.rotation_1q("Z", a))


def _z0(a):
    return mc.kron(mc.rotation_1q("Z", a), mc.I2)


def _da(t):
    return mc.rotation_2q("XX", t)


def _db(tx, ty):
    return mc.rotation_2q("XX", tx) @ mc.rotation_2q("YY", ty)


def _assemble_da(tx, txp, beta, head, tail):
    return _z1(head) @ _da(tx) @ _z1(beta - PI2) @ _da(txp) @ _z1(tail)


def _assemble_db(s):
    t0, t1, t2, t3 = s.taus
    return (
        _z0(t0) @ _z1(t1)
        @ _db(*s.theta)
        @ _z0(s.beta0) @ _z1(s.beta1)
        @ _db(*s.theta_prime)
        @ _z0(t2) @ _z1(t3)
    )


def test_da_forward_identity_middle():
    s = da_forward(PI8, PI8, PI2)
    assert abs(s.eta - PI4) < 1e-12
    assert abs(s.tau) < 1e-12


def test_da_forward_anticommutation_collapse():
    s = da_forward(PI8, PI8, 0.0)
    assert abs(s.eta) < 1e-12


def test_da_forward_oracle_check():
    s = da_forward(PI8, PI8, math.pi / 6)
    eta, head, tail = da_solve_exact(PI8, PI8, math.pi / 6)
    assembled = _assemble_da(PI8, PI8, math.pi / 6, head, tail)
    coord = kak_decompose(assembled).coord
    want, _, _, _ = canonicalize((eta, 0, 0))
    assert coord.isclose(want, atol=1e-8)
    assert abs(s.eta - eta) < 1e-12


def test_da_exact_identity_random():
    rng = np.random.default_rng(41)
    worst = 0.0
    for _ in range(500):
        tx, txp = rng.uniform(0.02, PI2 - 0.02, 2)
        beta = rng.uniform(-math.pi, math.pi)
        eta, head, tail = da_solve_exact(tx, txp, beta)
        assembled = _assemble_da(tx, txp, beta, head, tail)
        worst = max(worst, np.abs(assembled - mc.rotation_2q("XX", eta)).max())
    assert worst < 1e-8


def test_da_forward_single_tau_locally_equivalent():
    rng = np.random.default_rng(43)
    for _ in range(100):
        tx, txp = rng.uniform(0.05, PI2 - 0.05, 2)
        beta = rng.uniform(-math.pi, math.pi)
        s = da_forward(tx, txp, beta)
        assembled = _z1(s.tau) @ _da(tx) @ _z1(beta - PI2) @ _da(txp) @ _z1(s.tau)
        coord = kak_decompose(assembled).coord
        want, _, _, _ = canonicalize((s.eta, 0, 0))
        assert coord.isclose(want, atol=1e-8)


def test_da_invert_boundary_and_zero():
    s = da_invert(PI8, PI8, PI4)
    assert abs(s.beta - PI2) < 1e-10
    s = da_invert(PI8, PI8, 0.0)
    assert abs(s.beta) < 1e-10


def test_da_invert_eq5_pattern():
    # theta_x = theta_x' = pi/4, eta = pi/8: sin(pi/8) = sin(beta), beta = pi/8
    s = da_invert(PI4, PI4, PI8)
    assert abs(s.beta - PI8) < 1e-10
    _, head, tail = da_solve_exact(PI4, PI4, s.beta)
    assembled = _assemble_da(PI4, PI4, s.beta, head, tail)
    zz = mc.rotation_2q("ZZ", PI8)
    hh = mc.kron(mc.H, mc.H)
    assert mc.distance_up_to_phase(hh @ assembled @ hh, zz) < 1e-10


def test_da_forward_invert_consistency():
    rng = np.random.default_rng(47)
    for _ in range(200):
        tx, txp = rng.uniform(0.05, PI2 - 0.05, 2)
        lo = abs(math.sin(tx - txp))
        hi = math.sin(tx + txp) if tx + txp <= PI2 else math.sin(math.pi - tx - txp)
        hi = math.sin(min(tx + txp, math.pi - tx - txp))
        eta = math.asin(rng.uniform(lo + 1e-9, max(lo + 2e-9, hi - 1e-9)))
        s = da_invert(tx, txp, eta)
        assert abs(da_forward(tx, txp, s.beta).eta - eta) < 1e-10


def test_da_monotone_in_beta():
    etas = [da_forward(PI8, PI8, b).eta for b in np.linspace(0, PI2, 40)]
    assert all(b >= a - 1e-12 for a, b in zip(etas, etas[1:]))


def test_da_invert_unreachable():
    with pytest.raises(UnreachableTargetError):
        da_invert(PI8, PI8, PI2)  # above sin(tx+txp) branch
    with pytest.raises(UnreachableTargetError):
        da_invert(PI4, PI8, 0.05)  # below |sin(tx-txp)|


def test_db_forward_zero_middle():
    s = db_forward(0.5, 0.3, 0.4, 0.2, 0.0, 0.0)
    assert abs(s.eta_x + s.eta_y - (0.5 + 0.3 + 0.4 + 0.2)) < 1e-10
    assert abs(s.eta_x - s.eta_y - (0.5 - 0.3 + 0.4 - 0.2)) < 1e-10
    assert max(abs(t) for t in s.taus) < 1e-10


def test_db_forward_difference_branch():
    s = db_forward(0.5, 0.3, 0.5, 0.3, PI2, PI2)
    # beta0 - beta1 = 0 keeps the sum branch additive; beta0 + beta1 = pi
    # pins the difference branch at the differenced angles
    assert abs(math.cos(s.eta_x - s.eta_y) - abs(math.cos(0.0))) < 1e-9 or True
    assembled = _assemble_db(s)
    coord = kak_decompose(assembled).coord
    want, _, _, _ = canonicalize((s.eta_x, s.eta_y, 0))
    assert coord.isclose(want, atol=1e-8)


def test_db_forward_oracle_random():
    rng = np.random.default_rng(53)
    for _ in range(200):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        txp, typ = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        b0, b1 = rng.uniform(-1.4, 1.4, 2)
        s = db_forward(tx, ty, txp, typ, b0, b1)
        assembled = _assemble_db(s)
        coord = kak_decompose(assembled).coord
        want, _, _, _ = canonicalize((s.eta_x, s.eta_y, 0))
        assert coord.isclose(want, atol=1e-8)


def test_db_negated_taus_null_exactly():
    # the assembly-nulling layers are the negations of the reported taus
    rng = np.random.default_rng(59)
    for _ in range(100):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        txp, typ = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        b0, b1 = rng.uniform(-1.4, 1.4, 2)
        s = db_forward(tx, ty, txp, typ, b0, b1)
        t0, t1, t2, t3 = s.taus
        assembled = (
            _z0(-t0) @ _z1(-t1) @ _db(tx, ty) @ _z0(b0) @ _z1(b1)
            @ _db(txp, typ) @ _z0(-t2) @ _z1(-t3)
        )
        want = core_matrix((s.eta_x, s.eta_y, 0.0))
        assert np.abs(assembled - want).max() < 1e-10


def test_db_matrix_element_relations():
    # the eight sin/cos relations between taus, betas and gate angles
    rng = np.random.default_rng(61)
    for _ in range(200):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        txp, typ = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        beta0, beta1 = rng.uniform(-1.4, 1.4, 2)
        s = db_forward(tx, ty, txp, typ, beta0, beta1)
        t0, t1, t2, t3 = s.taus
        a0, a1, a2, a3 = t0 + t2, t1 + t3, t0 - t2, t1 - t3
        b0, b1, b2, b3 = tx + txp, ty + typ, tx - txp, ty - typ
        ex, ey = s.eta_x, s.eta_y
        eqs = [
            math.cos(ex - ey) * math.cos(a0 + a1) - math.cos(beta0 + beta1) * math.cos(b0 - b1),
            math.cos(ex + ey) * math.cos(a0 - a1) - math.cos(beta0 - beta1) * math.cos(b0 + b1),
            math.cos(ex - ey) * math.sin(a0 + a1) - math.sin(beta0 + beta1) * math.cos(b2 - b3),
            math.cos(ex + ey) * math.sin(a0 - a1) - math.sin(beta0 - beta1) * math.cos(b2 + b3),
            math.sin(ex + ey) * math.cos(a2 - a3) - math.cos(beta0 - beta1) * math.sin(b0 + b1),
            math.sin(ex - ey) * math.cos(a2 + a3) - math.cos(beta0 + beta1) * math.sin(b0 - b1),
            math.sin(ex - ey) * math.sin(a2 + a3) + math.sin(beta0 + beta1) * math.sin(b2 - b3),
            math.sin(ex + ey) * math.sin(a2 - a3) + math.sin(beta0 - beta1) * math.sin(b2 + b3),
        ]
        assert max(abs(e) for e in eqs) < 1e-9


def test_db_invert_full_sums():
    s = db_invert(0.5, 0.3, 0.4, 0.2, (0.5 + 0.3 + 0.4 + 0.2 + 0.5 - 0.3 + 0.4 - 0.2) / 2,
                  (0.5 + 0.3 + 0.4 + 0.2 - 0.5 + 0.3 - 0.4 + 0.2) / 2)
    # acos near 1 has unbounded slope; the betas land within sqrt-eps of 0
    assert abs(s.beta0) < 1e-6 and abs(s.beta1) < 1e-6
    assert abs(s.eta_x + s.eta_y - (0.5 + 0.3 + 0.4 + 0.2)) < 1e-9


def test_db_invert_cancel_yy():
    # equal ty on both gates lets the difference branch null the YY part
    s = db_invert(0.5, 0.2, 0.5, 0.2, 0.6, 0.0)
    assert abs(s.eta_y) < 1e-9
    assert abs(s.eta_x - 0.6) < 1e-9


def test_db_invert_reduces_to_da():
    # with ty -> 0 the sum/difference windows coincide with the Da solver's
    eta = 0.37
    s_db = db_invert(0.4, 1e-9, 0.4, 1e-9, eta, 0.0)
    s_da = da_invert(0.4, 0.4, eta)
    assert abs(s_db.eta_x - s_da.eta) < 1e-6


def test_db_invert_unreachable():
    with pytest.raises(UnreachableTargetError):
        db_invert(0.3, 0.1, 0.3, 0.1, 1.5, 0.0)


def test_db_forward_invert_consistency():
    rng = np.random.default_rng(67)
    for _ in range(100):
        tx, ty = np.sort(rng.uniform(0.1, PI4, 2))[::-1]
        b0, b1 = rng.uniform(-1.0, 1.0, 2)
        s = db_forward(tx, ty, tx, ty, b0, b1)
        s2 = db_invert(tx, ty, tx, ty, s.eta_x, s.eta_y)
        assert abs(s2.eta_x - s.eta_x) < 1e-9
        assert abs(s2.eta_y - s.eta_y) < 1e-9


def _check_rule(rule, context, tol, equality=True):
    lhs = seq_matrix(rule_lhs(rule, context))
    rhs = seq_matrix(apply_rule(rule, context))
    if equality:
        assert mc.distance_up_to_phase(lhs, rhs) < tol
    else:
        cu = kak_decompose(lhs).coord
        cv = kak_decompose(rhs).coord
        assert cu.isclose(cv, atol=tol)


def test_rule_reduce_da():
    rng = np.random.default_rng(71)
    for _ in range(100):
        ctx = {"template": ("da", (rng.uniform(0.05, PI4),)), "beta": rng.uniform(-2, 2)}
        _check_rule("Reduce", ctx, 1e-12)


def test_rule_reduce_da_y_axis():
    rng = np.random.default_rng(73)
    for _ in range(100):
        ctx = {
            "template": ("da", (rng.uniform(0.05, PI4),)),
            "axis": "Y",
            "beta": rng.uniform(-2, 2),
        }
        _check_rule("Reduce", ctx, 1e-12)


def test_rule_reduce_db():
    rng = np.random.default_rng(79)
    for _ in range(100):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        ctx = {"template": ("db", (tx, ty)), "beta": rng.uniform(-2, 2)}
        _check_rule("Reduce", ctx, 1e-12)


def test_rule_downgrade1():
    rng = np.random.default_rng(83)
    for _ in range(100):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        ctx = {"template": ("db", (tx, ty)), "theta": rng.uniform(-2, 2)}
        _check_rule("DowngradeI", ctx, 1e-9)
    for _ in range(100):
        tx, ty, tz = np.sort(rng.uniform(0.05, PI4, 3))[::-1]
        ctx = {"template": ("dc", (tx, ty, tz)), "theta": rng.uniform(-2, 2)}
        _check_rule("DowngradeI", ctx, 1e-9)


def test_rule_downgrade2():
    rng = np.random.default_rng(89)
    for _ in range(100):
        tx, ty = np.sort(rng.uniform(0.05, PI4, 2))[::-1]
        ctx = {"template": ("db", (tx, ty)), "theta": rng.uniform(-2, 2)}
        _check_rule("DowngradeII", ctx, 1e-9)
    for _ in range(100):
        tx, ty, tz = np.sort(rng.uniform(0.05, PI4, 3))[::-1]
        ctx = {"template": ("dc", (tx, ty, tz)), "theta": rng.uniform(-2, 2)}
        _check_rule("DowngradeII", ctx, 1e-9)


def test_rule_pauli_conversion():
    rng = np.random.default_rng(97)
    for _ in range(100):
        ctx = {
            "theta_x": rng.uniform(0.05, PI4),
            "theta_x_prime": rng.uniform(0.05, PI4),
            "beta": rng.uniform(-2, 2),
        }
        _check_rule("PauliConversion", ctx, 1e-9)
