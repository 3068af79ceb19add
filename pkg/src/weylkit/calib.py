"""Closed-form calibration solvers for basis-gate sandwiches.

A tunable one-qubit rotation bracketed by two fixed entangling gates acts,
inside a three-element su(2) subalgebra, like an ordinary Euler-angle
product.  Solving that 2x2 problem in closed form turns the sandwich into a
tunable two-qubit rotation; fixed Z-rotations (calibration operators) absorb
the leftover axis misalignment.

Conventions: su(2) elements are written e^{i a s1} e^{i mu s3} e^{i b s1}
with abstract Pauli-like generators s1, s3 (s1 s3 = -i s2).  Concrete
embeddings used elsewhere: s1 = XX with s3 = I(x)Z (Prop.-1 sandwiches),
s1 = XX with s3 = I(x)Y and s1 = YY with s3 = X(x)I (the two commuting
factors of the XX+YY algebra), and the odd/even Z-layer blocks of the
X0X1-Z0Z1 algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnreachableTargetError, WeylkitError
from . import matcore as mc

PI2 = math.pi / 2
_EPS = 1e-12


def normalize_angle(a: float) -> float:
    """Wrap into (-pi, pi]."""
    a = math.fmod(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    elif a > math.pi:
        a -= 2 * math.pi
    return a


def block_components(theta1: float, mu: float, theta2: float, dagger: bool = False):
    """Components (w, x, y, z) of e^{i t1 s1} e^{i mu s3} e^{i (+/-)t2 s1}.

    The product equals w I + i(x s1 + y s2 + z s3); ``dagger`` negates the
    trailing rotation.
    """
    t2 = -theta2 if dagger else theta2
    b0, b2 = theta1 + t2, theta1 - t2
    cm, sm = math.cos(mu), math.sin(mu)
    return (cm * math.cos(b0), cm * math.sin(b0), sm * math.sin(b2), sm * math.cos(b2))


def block_calibrate(w: float, x: float, y: float, z: float):
    """Outer s3-rotations turning a block product into a pure s1 rotation.

    Returns ``(eta, head, tail)`` with

        e^{i head s3} (w I + i x s1 + i y s2 + i z s3) e^{i tail s3}
            = cos(eta) I + i sin(eta) s1,   eta in [0, pi/2].
    """
    eta = math.atan2(math.hypot(x, y), math.hypot(w, z))
    s = -math.atan2(z, w) if (abs(w) > _EPS or abs(z) > _EPS) else 0.0
    d = -math.atan2(y, x) if (abs(x) > _EPS or abs(y) > _EPS) else 0.0
    return eta, normalize_angle((s - d) / 2), normalize_angle((s + d) / 2)


def block_forward(theta1: float, mu: float, theta2: float, dagger: bool = False):
    """(eta, head, tail) for the full sandwich; the identity

        e^{i head s3} e^{i t1 s1} e^{i mu s3} e^{i (+/-)t2 s1} e^{i tail s3}
            = e^{i eta s1}

    holds exactly.
    """
    return block_calibrate(*block_components(theta1, mu, theta2, dagger))


def block_invert(theta1: float, theta2: float, eta: float, dagger: bool = False) -> float:
    """Middle angle mu achieving a given eta; raises if unreachable.

    sin^2(eta) sweeps between sin^2(t1 - t2) and sin^2(t1 + t2) as mu varies
    (roles swapped for the dagger form).
    """
    t2 = -theta2 if dagger else theta2
    a = math.sin(theta1 + t2) ** 2
    b = math.sin(theta1 - t2) ** 2
    target = math.sin(eta) ** 2
    if abs(a - b) < _EPS:
        if abs(target - a) < 1e-9:
            return 0.0
        raise UnreachableTargetError(f"eta={eta} unreachable: sandwich angle is pinned")
    c2 = (target - b) / (a - b)
    if c2 < -1e-12 or c2 > 1 + 1e-12:
        raise UnreachableTargetError(
            f"eta={eta} outside reachable range of the (t1={theta1}, t2={theta2}) sandwich"
        )
    c2 = min(1.0, max(0.0, c2))
    return -math.acos(math.sqrt(c2))


# ---------------------------------------------------------------------------
# Proposition-1 style solvers: D_a(tx) Z1-sandwiches.


@dataclass(frozen=True)
class DaSandwich:
    """Solved Z1(tau) Da(tx) Z1(beta - pi/2) Da(tx') Z1(tau) sandwich."""

    theta_x: float
    theta_x_prime: float
    beta: float
    eta: float
    tau: float
    dagger_form: bool = False


def da_solve_exact(theta_x: float, theta_x_prime: float, beta: float, dagger: bool = False):
    """(eta, head, tail) with exact equality

        e^{i eta XX} = Z1(head) Da(tx) Z1(beta - pi/2) Da(tx') Z1(tail)

    (dagger form: middle Z1(beta), trailing gate daggered).
    """
    mu = beta if dagger else beta - PI2
    return block_forward(theta_x, mu, theta_x_prime, dagger)


def da_forward(theta_x: float, theta_x_prime: float, beta: float) -> DaSandwich:
    """Achieved XX angle and the symmetric calibration Z-rotation.

    For theta_x == theta_x_prime the sandwich with a single tau on both
    sides is an exact identity (sin eta = sin beta * sin(tx + tx')); for
    unequal gate angles it is exact up to one extra local Z, so the
    contract is local equivalence.
    """
    if theta_x <= 0 or theta_x_prime <= 0:
        raise WeylkitError("gate angles must be positive")
    eta, head, tail = da_solve_exact(theta_x, theta_x_prime, beta)
    tau = normalize_angle((head + tail) / 2)
    return DaSandwich(theta_x, theta_x_prime, beta, eta, tau)


def da_invert(theta_x: float, theta_x_prime: float, eta_target: float) -> DaSandwich:
    """beta (and tau) realizing a requested XX angle; raises if out of range."""
    if theta_x <= 0 or theta_x_prime <= 0:
        raise WeylkitError("gate angles must be positive")
    if eta_target < -1e-12:
        raise UnreachableTargetError("eta_target must be nonnegative")
    mu = block_invert(theta_x, theta_x_prime, max(0.0, eta_target))
    beta = normalize_angle(mu + PI2)
    s = da_forward(theta_x, theta_x_prime, beta)
    if abs(s.eta - eta_target) > 1e-10:
        raise UnreachableTargetError(
            f"solver found eta={s.eta}, requested {eta_target}"
        )
    return s


# ---------------------------------------------------------------------------
# Proposition-2 style solvers: D_b sandwiches with a Z0 Z1 middle layer.
#
# The XX+YY Cartan algebra splits into commuting su(2) blocks acting on the
# odd/even halves of the computational basis; a D_b(tx, ty) acts with angle
# tx + ty on the odd block and tx - ty on the even block, and a Z0(b0) Z1(b1)
# layer acts with angles b0 - b1 and b0 + b1 respectively.


@dataclass(frozen=True)
class DbSandwich:
    """Solved Z0(t0) Z1(t1) Db(tx,ty) Z0(b0) Z1(b1) Db(tx',ty') Z0(t2) Z1(t3)."""

    theta: tuple
    theta_prime: tuple
    beta0: float
    beta1: float
    eta_x: float
    eta_y: float
    taus: tuple  # (tau0, tau1, tau2, tau3)


def _db_blocks(theta, theta_prime, beta0, beta1):
    tx, ty = theta
    txp, typ = theta_prime
    odd = block_forward(tx + ty, beta0 - beta1, txp + typ)
    even = block_forward(tx - ty, beta0 + beta1, txp - typ)
    return odd, even


def _zlayer_from_blocks(a_odd: float, a_even: float):
    """Z0/Z1 angles realizing given odd/even block s3 angles."""
    return (a_even + a_odd) / 2, (a_even - a_odd) / 2


def db_forward(theta_x, theta_y, theta_x_prime, theta_y_prime, beta0, beta1) -> DbSandwich:
    """Achieved (eta_x, eta_y) and calibration Z-rotations for the Eq.-8 shape.

    cos^2(eta_x +/- eta_y) interpolates between the squared cosines of the
    summed and differenced gate angles as beta0 -/+ beta1 sweeps.

    The reported taus satisfy the eight matrix-element relations tying
    (tau0 +/- tau2, tau1 +/- tau3) to the beta and gate angles; the layers
    that null the residual Z-dressing in the e^{+i beta Z} convention are
    their negations (the two assemblies differ only by local Z-rotations,
    so both are locally equivalent to the achieved XX+YY rotation).
    """
    if not (theta_x >= theta_y > 0 and theta_x_prime >= theta_y_prime > 0):
        raise WeylkitError("expected tx >= ty > 0 for both gates")
    odd, even = _db_blocks((theta_x, theta_y), (theta_x_prime, theta_y_prime), beta0, beta1)
    u, head_odd, tail_odd = odd
    v, head_even, tail_even = even
    tau0, tau1 = _zlayer_from_blocks(head_odd, head_even)
    tau2, tau3 = _zlayer_from_blocks(tail_odd, tail_even)
    taus = tuple(normalize_angle(-t) for t in (tau0, tau1, tau2, tau3))
    return DbSandwich(
        (theta_x, theta_y),
        (theta_x_prime, theta_y_prime),
        beta0,
        beta1,
        (u + v) / 2,
        (u - v) / 2,
        taus,
    )


def db_invert(theta_x, theta_y, theta_x_prime, theta_y_prime, eta_x_target, eta_y_target) -> DbSandwich:
    """beta0, beta1 (plus calibrations) hitting a target (eta_x, eta_y)."""
    if not (theta_x >= theta_y > 0 and theta_x_prime >= theta_y_prime > 0):
        raise WeylkitError("expected tx >= ty > 0 for both gates")
    u = eta_x_target + eta_y_target
    v = eta_x_target - eta_y_target
    if u < -1e-12 or v < -1e-12:
        raise UnreachableTargetError("targets must satisfy eta_x >= |eta_y| >= 0")
    mu_odd = block_invert(theta_x + theta_y, theta_x_prime + theta_y_prime, max(0.0, u))
    mu_even = block_invert(theta_x - theta_y, theta_x_prime - theta_y_prime, max(0.0, v))
    beta0 = (mu_even + mu_odd) / 2
    beta1 = (mu_even - mu_odd) / 2
    s = db_forward(theta_x, theta_y, theta_x_prime, theta_y_prime, beta0, beta1)
    if abs(s.eta_x - eta_x_target) > 1e-9 or abs(s.eta_y - eta_y_target) > 1e-9:
        raise UnreachableTargetError(
            f"solver landed on ({s.eta_x}, {s.eta_y}), requested "
            f"({eta_x_target}, {eta_y_target})"
        )
    return s


# ---------------------------------------------------------------------------
# Corollary-1 rewrite rules, expressed over explicit 4x4 matrices.  Sequences
# are in matrix-product order (leftmost factor applied last).


def _tpl(angles) -> np.ndarray:
    tx, ty, tz = (tuple(angles) + (0.0, 0.0, 0.0))[:3]
    return (
        mc.rotation_2q("XX", tx)
        @ mc.rotation_2q("YY", ty)
        @ mc.rotation_2q("ZZ", tz)
    )


def _rot1q_on(q: int, axis: str, angle: float) -> np.ndarray:
    r = mc.rotation_1q(axis, angle)
    return mc.kron(r, mc.I2) if q == 0 else mc.kron(mc.I2, r)


def apply_rule(rule: str, context: dict) -> list:
    """Rewrite a gate sandwich per the parameterized-coordinate rules.

    Returns the rewritten sequence as a list of 4x4 matrices in
    matrix-product order; its product equals the rule's left-hand side up to
    global phase.  Raises WeylkitError when the context does not match the
    rule's shape.
    """
    if rule == "Reduce":
        tag, angles = context["template"]
        axis = context.get("axis", "Z")
        beta = context["beta"]
        if tag not in ("da", "db") or (tag == "db" and axis != "Z"):
            raise WeylkitError(f"Reduce does not apply to {tag} with axis {axis}")
        d = _tpl(angles)
        return [d, _rot1q_on(1, axis, beta - PI2), d.conj().T, _rot1q_on(1, axis, PI2)]

    if rule == "DowngradeI":
        tag, angles = context["template"]
        theta = context["theta"]
        if tag == "db":
            lower, axis = _tpl(angles[:1]), "Y"
        elif tag == "dc":
            lower, axis = _tpl(angles[:2]), "Z"
        else:
            raise WeylkitError("DowngradeI applies to db or dc sandwiches")
        return [lower, _rot1q_on(1, axis, theta), lower.conj().T]

    if rule == "DowngradeII":
        tag, angles = context["template"]
        theta = context["theta"]
        if tag == "db":
            lower, axis = _tpl(angles[:1]), "Y"
            residue = mc.rotation_2q("YY", 2 * angles[1])
        elif tag == "dc":
            lower, axis = _tpl(angles[:2]), "Z"
            residue = mc.rotation_2q("ZZ", 2 * angles[2])
        else:
            raise WeylkitError("DowngradeII applies to db or dc sandwiches")
        return [residue, lower, _rot1q_on(1, axis, theta), lower]

    if rule == "PauliConversion":
        tx = context["theta_x"]
        txp = context.get("theta_x_prime", tx)
        beta = context["beta"]
        eta, head, tail = da_solve_exact(tx, txp, beta)
        da = _tpl((tx,))
        dap = _tpl((txp,))
        return [
            _rot1q_on(1, "Y", -head),
            da,
            _rot1q_on(1, "Y", -(beta - PI2)),
            dap,
            _rot1q_on(1, "Y", -tail),
        ]

    raise WeylkitError(f"unknown rule {rule!r}")


def rule_lhs(rule: str, context: dict) -> list:
    """The original (left-hand-side) sequence a rule rewrites."""
    if rule == "Reduce":
        _, angles = context["template"]
        d = _tpl(angles)
        return [d, _rot1q_on(1, context.get("axis", "Z"), context["beta"]), d]
    if rule in ("DowngradeI", "DowngradeII"):
        tag, angles = context["template"]
        axis = "Y" if tag == "db" else "Z"
        d = _tpl(angles)
        other = d.conj().T if rule == "DowngradeI" else d
        return [d, _rot1q_on(1, axis, context["theta"]), other]
    if rule == "PauliConversion":
        tx = context["theta_x"]
        txp = context.get("theta_x_prime", tx)
        return [mc.rotation_2q("XX", da_solve_exact(tx, txp, context["beta"])[0])]
    raise WeylkitError(f"unknown rule {rule!r}")


def seq_matrix(seq) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    for m in seq:
        out = out @ m
    return out
