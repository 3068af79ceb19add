"""Two-qubit synthesis into an arbitrary native basis gate.

The flow for one target: KAK both the target and the basis gate, accumulate
the bulk of the target's Cartan coordinate by repeating the basis gate with
axis-converting Clifford dressings (rotation padding), then close the
remaining sub-threshold rotation with calibration sandwiches that turn a
tunable one-qubit layer between two basis invocations into a tunable
two-qubit rotation (residual synthesis).  Everything is closed-form; the
work per call is constant apart from emitting the step list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from .calib import block_forward, block_invert, normalize_angle
from .errors import UnitarityError, WeylkitError
from .kak import (
    _FLIP_PAULI,
    _PERM_CLIFFORD,
    CartanCoordinate,
    KakFactorization,
    TemplateClass,
    classify_template,
    kak_decompose,
)

PI4 = math.pi / 4
PI2 = math.pi / 2
_TOL = 1e-10
_FLOOR_EPS = 1e-9

_PAULI = (mc.X, mc.Y, mc.Z)
_AXIS_NAME = "xyz"


# ---------------------------------------------------------------------------
# Plan representation


@dataclass(frozen=True)
class OneQubitStep:
    q: int
    matrix: np.ndarray
    tag: str = ""


@dataclass(frozen=True)
class BasisStep:
    label: str


@dataclass
class SynthesisPlan:
    """Ordered gate list (time order) realizing a two-qubit target."""

    steps: list
    basis_count: int
    target_coord: CartanCoordinate
    residual_achieved: float
    bases: dict  # label -> BasisGate
    global_phase: complex = 1.0 + 0.0j
    n_pad: int = 0       # plain padding invocations (incl. fresh leading gates)
    n_residual: int = 0  # closing invocations added by residual synthesis

    def invocation_labels(self):
        return [s.label for s in self.steps if isinstance(s, BasisStep)]


def assemble_steps(steps, bases) -> np.ndarray:
    """Product of a time-ordered step list (first step acts first)."""
    out = np.eye(4, dtype=complex)
    for s in steps:
        if isinstance(s, BasisStep):
            m = bases[s.label].matrix
        elif s.q == 0:
            m = mc.kron(s.matrix, mc.I2)
        else:
            m = mc.kron(mc.I2, s.matrix)
        out = m @ out
    return out


def assemble_plan(plan: SynthesisPlan) -> np.ndarray:
    return plan.global_phase * assemble_steps(plan.steps, plan.bases)


# ---------------------------------------------------------------------------
# Basis gates


@dataclass(frozen=True)
class BasisGate:
    """A native two-qubit gate plus its KAK data and template class."""

    label: str
    matrix: np.ndarray
    kak: KakFactorization
    template: TemplateClass
    dagger_available: bool = True

    @classmethod
    def from_matrix(cls, label: str, matrix: np.ndarray, dagger_available: bool = True):
        matrix = mc.require_unitary(np.asarray(matrix, dtype=complex), what=f"basis gate {label}")
        f = kak_decompose(matrix)
        tpl = classify_template(f.coord)
        if tpl.tx < 1e-8:
            raise WeylkitError(f"basis gate {label} is not entangling")
        return cls(label, matrix, f, tpl, dagger_available)

    @classmethod
    def from_template(cls, tag: str, angles, label: str | None = None, dagger_available: bool = True):
        angles = tuple(float(a) for a in angles)
        want = {"da": 1, "db": 2, "dc": 3}.get(tag)
        if want is None or len(angles) != want:
            raise WeylkitError(f"bad template spec {tag}:{angles}")
        tx = angles[0]
        ty = angles[1] if len(angles) > 1 else 0.0
        tz = angles[2] if len(angles) > 2 else 0.0
        if not (0 < tx <= PI4 and 0 <= ty <= tx and abs(tz) <= ty):
            raise WeylkitError(f"angles {angles} are outside the canonical template domain")
        m = (
            mc.rotation_2q("XX", tx)
            @ mc.rotation_2q("YY", ty)
            @ mc.rotation_2q("ZZ", tz)
        )
        if label is None:
            label = tag + "(" + ",".join(f"{a:.6g}" for a in angles) + ")"
        return cls.from_matrix(label, m, dagger_available)

    def coord(self) -> CartanCoordinate:
        return self.kak.coord


# ---------------------------------------------------------------------------
# Step-level building blocks


def _one_q(q, matrix, tag=""):
    return OneQubitStep(q, np.asarray(matrix, dtype=complex), tag)


def _conj(inner, c0, c1, tag):
    """Steps for C . inner . C^dag with C = c0 (x) c1."""
    pre = [_one_q(0, c0.conj().T, tag), _one_q(1, c1.conj().T, tag)]
    post = [_one_q(0, c0, tag), _one_q(1, c1, tag)]
    return pre + inner + post


def _perm_wrap(inner, sigma):
    """Conjugate so that canonical-frame axis i content lands on axis sigma[i]."""
    if tuple(sigma) == (0, 1, 2):
        return inner
    w = _PERM_CLIFFORD[tuple(sigma)]
    return _conj(inner, w, w, "axis-perm")


def _flip_wrap(inner, wa, wb):
    """Conjugate by the Pauli that negates the content on axes wa and wb."""
    p = _FLIP_PAULI[tuple(sorted((wa, wb)))]
    return [_one_q(0, p, "sign-flip")] + inner + [_one_q(0, p, "sign-flip")]


def _sign_wrap(inner, axes, signs):
    """Apply pair sign flips so content on `axes` carries `signs`."""
    neg = [w for w, s in zip(axes, signs) if s < 0]
    if not neg:
        return inner
    if len(neg) == 2:
        return _flip_wrap(inner, neg[0], neg[1])
    other = next(w for w in range(3) if w not in axes)
    return _flip_wrap(inner, neg[0], other)


def _sigma_for(primary, secondary=None):
    """Axis permutation sending template axis 0 -> primary (1 -> secondary)."""
    rest = [w for w in range(3) if w != primary]
    if secondary is None:
        new = [primary] + rest
    else:
        new = [primary, secondary] + [w for w in rest if w != secondary]
    sigma = [0, 0, 0]
    for old, axis in enumerate(new):
        sigma[old] = axis
    return tuple(sigma)


def _zlayer_steps(a_odd, a_even, tag):
    """Z0/Z1 rotations realizing odd/even block s3 angles (time order)."""
    a0 = (a_even + a_odd) / 2
    a1 = (a_even - a_odd) / 2
    out = []
    if abs(a0) > _TOL:
        out.append(_one_q(0, mc.rotation_1q("Z", a0), tag))
    if abs(a1) > _TOL:
        out.append(_one_q(1, mc.rotation_1q("Z", a1), tag))
    return out


def _zmid_pair_steps(theta, u, v, tpl_steps):
    """Canonical-frame sandwich delivering exp(i((u+v)/2 XX + (u-v)/2 YY)).

    Two invocations of an XX-type gate of angle `theta` with Z0/Z1 layers;
    the odd/even Z-layer blocks solve two independent one-axis problems.
    """
    mu_o = block_invert(theta, theta, u)
    mu_e = block_invert(theta, theta, v)
    _, ho, to = block_forward(theta, mu_o, theta)
    _, he, te = block_forward(theta, mu_e, theta)
    return (
        _zlayer_steps(to, te, "cal")
        + tpl_steps()
        + _zlayer_steps(mu_o, mu_e, "mid")
        + tpl_steps()
        + _zlayer_steps(ho, he, "cal")
    )


def _xylayer_steps(y1_angle, x0_angle, tag):
    out = []
    if abs(x0_angle) > _TOL:
        out.append(_one_q(0, mc.rotation_1q("X", x0_angle), tag))
    if abs(y1_angle) > _TOL:
        out.append(_one_q(1, mc.rotation_1q("Y", y1_angle), tag))
    return out


def _xymid_pair_steps(theta_x, theta_y, eta_x, eta_y, tpl_steps):
    """Canonical-frame sandwich delivering exp(i(eta_x XX + eta_y YY)).

    Two invocations of an XX+YY-type gate with X0/Y1 middle layers; the two
    commuting su(2) factors give independent reach [0, 2*theta_x] x
    [0, 2*theta_y].
    """
    mu1 = block_invert(theta_x, theta_x, eta_x)
    _, h1, t1 = block_forward(theta_x, mu1, theta_x)
    if theta_y > _TOL:
        mu2 = block_invert(theta_y, theta_y, eta_y)
        _, h2, t2 = block_forward(theta_y, mu2, theta_y)
    else:
        if abs(eta_y) > _TOL:
            raise WeylkitError("XX-type pair cannot deliver a YY component this way")
        mu2 = h2 = t2 = 0.0
    return (
        _xylayer_steps(t1, t2, "cal")
        + tpl_steps()
        + _xylayer_steps(mu1, mu2, "mid")
        + tpl_steps()
        + _xylayer_steps(h1, h2, "cal")
    )


# ---------------------------------------------------------------------------
# Rotation padding


@dataclass(frozen=True)
class Pad:
    """One padding invocation: template axes mapped onto target axes."""

    axes: tuple   # target axis per template angle (length 1, 2 or 3)
    signs: tuple  # delivered sign per mapped axis


def pad_rotations(target: CartanCoordinate, basis: BasisGate):
    """Padding invocations and the leftover (signed) rotation triple.

    Da bases floor each coordinate independently; Db/Dc bases greedily map
    their larger template angle onto the largest remaining component and
    batch as many invocations as fit without overshoot.
    """
    t = list(target.astuple())
    tpl = basis.template
    pads: list[Pad] = []
    rem = t[:]
    if tpl.tag == "da":
        for w in range(3):
            m = int(math.floor(abs(rem[w]) / tpl.tx + _FLOOR_EPS))
            s = 1.0 if rem[w] >= 0 else -1.0
            for _ in range(m):
                pads.append(Pad((w,), (s,)))
            rem[w] -= s * m * tpl.tx
    else:
        angles = [tpl.tx, tpl.ty] if tpl.tag == "db" else [tpl.tx, tpl.ty, abs(tpl.tz)]
        while True:
            order = sorted(range(3), key=lambda w: -abs(rem[w]))
            counts = [int(math.floor(abs(rem[order[i]]) / a + _FLOOR_EPS)) if a > _TOL else 10**9
                      for i, a in enumerate(angles)]
            n = min(counts)
            if n < 1:
                break
            axes = tuple(order[: len(angles)])
            signs = tuple(1.0 if rem[w] >= 0 else -1.0 for w in axes)
            if tpl.tag == "dc":
                # pair sign flips preserve parity: a Dc pad can only deliver
                # an even number of sign changes relative to its own
                # (+, +, sign(tz)) pattern.  When the target parity differs,
                # padding would overshoot some axis backwards -> stop.
                natural = (1.0, 1.0, 1.0 if tpl.tz >= 0 else -1.0)
                parity = 1.0
                for s, nat in zip(signs, natural):
                    parity *= s * nat
                if parity < 0:
                    break
            for _ in range(n):
                pads.append(Pad(axes, signs))
            for a, w, s in zip(angles, axes, signs):
                if a > _TOL:
                    rem[w] -= s * n * a
    rem = [0.0 if abs(v) < _TOL else v for v in rem]
    return pads, tuple(rem)


def _pad_steps(basis: BasisGate, pad: Pad, tpl_steps):
    tpl = basis.template
    if len(pad.axes) == 1:
        sigma = _sigma_for(pad.axes[0])
    elif len(pad.axes) == 2:
        sigma = _sigma_for(pad.axes[0], pad.axes[1])
    else:
        sigma = [0, 0, 0]
        for old, axis in enumerate(pad.axes):
            sigma[old] = axis
        sigma = tuple(sigma)
    inner = tpl_steps()
    # a negative template tz delivers a negative z-component before dressing
    base_signs = list(pad.signs)
    if len(pad.axes) == 3 and tpl.tz < 0:
        base_signs[2] = -base_signs[2]
    wrapped = _perm_wrap(inner, sigma)
    return _sign_wrap(wrapped, pad.axes, tuple(base_signs))


# ---------------------------------------------------------------------------
# Residual planning (Da-type flow, shared by Dc via effective gates)


@dataclass(frozen=True)
class _Move:
    primary: int
    secondary: int | None
    amounts: tuple  # signed (A_primary, A_secondary)
    borrow: bool    # primary redelivers one padding invocation


def _plan_residual_da(res, pad_counts, theta, cap2, orig_signs=None):
    """Choose sandwich moves covering the residual with fewest invocations.

    Each move is one sandwich: `borrow` moves consume a padding invocation
    and add one closing gate; fresh moves add two gates (the leading one is
    accounted as padding).  Enumeration is over a constant-size structure
    set; reachability: |A_p| + |A_s| <= cap2 per sandwich.
    """
    active = [w for w in range(3) if abs(res[w]) > _TOL]
    if not active:
        return []
    active.sort(key=lambda w: -abs(res[w]))
    if orig_signs is None:
        orig_signs = [1.0 if res[w] >= 0 else -1.0 for w in range(3)]

    def redeliver(w):
        # a borrowed pad on axis w re-delivers its padding angle plus the
        # residual that axis still carries (signs agree by construction)
        return orig_signs[w] * theta + res[w]

    def singles(w, pads):
        opts = []
        if pads[w] > 0:
            opts.append((_Move(w, None, (redeliver(w), 0.0), True), w))
        for wp in range(3):
            if wp != w and pads[wp] > 0 and abs(res[wp]) <= _TOL:
                opts.append((_Move(wp, w, (orig_signs[wp] * theta, res[w]), True), wp))
        opts.append((_Move(w, None, (res[w], 0.0), False), None))
        return opts

    def pairs(p, s, pads):
        opts = []
        big, small = (p, s) if abs(res[p]) >= abs(res[s]) else (s, p)
        if pads[big] > 0 and theta + abs(res[big]) + abs(res[small]) <= cap2 + _TOL:
            opts.append((_Move(big, small, (redeliver(big), res[small]), True), big))
        if pads[small] > 0 and theta + abs(res[small]) + abs(res[big]) <= cap2 + _TOL:
            opts.append((_Move(small, big, (redeliver(small), res[big]), True), small))
        if abs(res[p]) + abs(res[s]) <= cap2 + _TOL:
            opts.append((_Move(big, small, (res[big], res[small]), False), None))
        return opts

    if len(active) == 1:
        structures = [[(active[0],)]]
    elif len(active) == 2:
        a, b = active
        structures = [[(a, b)], [(a,), (b,)]]
    else:
        a, b, c = active
        structures = [
            [(a, b), (c,)],
            [(a, c), (b,)],
            [(b, c), (a,)],
            [(a,), (b,), (c,)],
        ]

    best = None
    for structure in structures:
        def rec(idx, pads, moves):
            nonlocal best
            if idx == len(structure):
                cost = sum(1 if m.borrow else 2 for m in moves)
                key = (cost, len(moves))
                if best is None or key < best[0]:
                    best = (key, list(moves))
                return
            group = structure[idx]
            opts = singles(group[0], pads) if len(group) == 1 else pairs(group[0], group[1], pads)
            for move, pad_axis in opts:
                if pad_axis is not None:
                    pads2 = list(pads)
                    pads2[pad_axis] -= 1
                else:
                    pads2 = pads
                rec(idx + 1, pads2, moves + [move])

        rec(0, list(pad_counts), [])
    return best[1]


def _emit_move_da(move: _Move, theta, tpl_steps):
    """Steps for one Da-family sandwich move (canonical XX-type gate)."""
    a_p, a_s = move.amounts
    if move.secondary is None or abs(a_s) <= _TOL:
        axes = (move.primary, (move.primary + 1) % 3)
        mag_p, mag_s = abs(a_p), 0.0
        signs = (1.0 if a_p >= 0 else -1.0, 1.0)
        u = v = mag_p
        sigma_axes = axes
    else:
        axes = (move.primary, move.secondary)
        mag_p, mag_s = abs(a_p), abs(a_s)
        signs = (1.0 if a_p >= 0 else -1.0, 1.0 if a_s >= 0 else -1.0)
        u, v = mag_p + mag_s, mag_p - mag_s
        sigma_axes = axes
    inner = _zmid_pair_steps(theta, u, v, tpl_steps)
    wrapped = _perm_wrap(inner, _sigma_for(sigma_axes[0], sigma_axes[1]))
    return _sign_wrap(wrapped, sigma_axes, signs)


def _core_da_flow(t_signed, theta, cap2, tpl_steps, inv_cost=1):
    """Padding plus residual moves for an XX-type (effective) gate.

    Returns (steps, invocations, n_pad, n_residual) where counts are in
    physical basis-gate invocations (inv_cost per template invocation).
    """
    pads_per_axis = [0, 0, 0]
    rem = list(t_signed)
    steps = []
    for w in range(3):
        m = int(math.floor(abs(rem[w]) / theta + _FLOOR_EPS))
        pads_per_axis[w] = m
        s = 1.0 if rem[w] >= 0 else -1.0
        rem[w] -= s * m * theta
        if abs(rem[w]) < _TOL:
            rem[w] = 0.0
    orig_signs = [1.0 if t_signed[w] >= 0 else -1.0 for w in range(3)]
    moves = _plan_residual_da(rem, pads_per_axis, theta, cap2, orig_signs)
    borrowed = [0, 0, 0]
    for mv in moves:
        if mv.borrow:
            borrowed[mv.primary] += 1
    n_pad = 0
    for w in range(3):
        for _ in range(pads_per_axis[w] - borrowed[w]):
            steps += _sign_wrap(_perm_wrap(tpl_steps(), _sigma_for(w)), (w,), (orig_signs[w],))
            n_pad += 1
    n_res = 0
    for mv in moves:
        steps += _emit_move_da(mv, theta, tpl_steps)
        n_pad += 1   # leading gate (redelivered pad or fresh, both count as padding)
        n_res += 1
    # each move emits exactly two template invocations
    total = sum(pads_per_axis) - sum(borrowed) + 2 * len(moves)
    return steps, inv_cost * total, inv_cost * n_pad, inv_cost * n_res


# ---------------------------------------------------------------------------
# Db residual flow


@dataclass(frozen=True)
class _DbMove:
    primary: int
    secondary: int | None
    amounts: tuple
    borrow_pad: tuple | None  # (axes, signs) of the borrowed padding pair


def _plan_residual_db(res, pad_groups, theta_x, theta_y, cap_x, cap_y):
    active = [w for w in range(3) if abs(res[w]) > _TOL]
    if not active:
        return []
    active.sort(key=lambda w: -abs(res[w]))

    def sgn(w):
        return 1.0 if res[w] >= 0 else -1.0

    def chunks(amount):
        return max(1, int(math.ceil(abs(amount) / cap_x - _FLOOR_EPS)))

    def fresh(p, s):
        if s is not None and abs(res[s]) > cap_y + _TOL:
            return None
        amt_s = res[s] if s is not None else 0.0
        return _DbMove(p, s, (res[p], amt_s), None), 2 * chunks(res[p])

    def borrow(group):
        (w1, w2), signs = group
        a1 = signs[0] * (theta_x + abs(res[w1])) if abs(res[w1]) > _TOL else signs[0] * theta_x
        extra2 = abs(res[w2]) if abs(res[w2]) > _TOL else 0.0
        if theta_y + extra2 > cap_y + _TOL or theta_x + abs(res[w1]) > cap_x + _TOL:
            return None
        a2 = signs[1] * (theta_y + extra2)
        return _DbMove(w1, w2, (a1, a2), group), 1

    candidates = []

    def all_fresh(struct):
        moves, cost = [], 0
        for group in struct:
            p = group[0]
            s = group[1] if len(group) > 1 else None
            f = fresh(p, s)
            if f is None:
                return None
            moves.append(f[0])
            cost += f[1]
        return moves, cost

    if len(active) == 1:
        structures = [[(active[0],)]]
    elif len(active) == 2:
        a, b = active
        structures = [[(a, b)], [(b, a)], [(a,), (b,)]]
    else:
        a, b, c = active
        structures = []
        for p1, s1, rest in [(a, b, c), (a, c, b), (b, c, a), (b, a, c), (c, a, b), (c, b, a)]:
            structures.append([(p1, s1), (rest,)])
        structures.append([(a,), (b,), (c,)])
    for st in structures:
        got = all_fresh(st)
        if got:
            candidates.append(got)

    for group in pad_groups:
        (w1, w2), _signs = group
        b = borrow(group)
        if b is None:
            continue
        covered = {w1, w2}
        rest = [w for w in active if w not in covered and abs(res[w]) > _TOL]
        tail_structs = [[(w,) for w in rest]]
        if len(rest) == 2:
            tail_structs.append([(rest[0], rest[1])])
        for ts in tail_structs:
            got = all_fresh(ts)
            if got:
                candidates.append(([b[0]] + got[0], b[1] + got[1]))

    if not candidates:
        raise WeylkitError("no feasible residual plan for the Db basis")
    candidates.sort(key=lambda mc_: (mc_[1], len(mc_[0])))
    return candidates[0][0]


def _emit_move_db(move: _DbMove, theta_x, theta_y, cap_x, tpl_steps):
    a_p, a_s = move.amounts
    steps = []
    sign_p = 1.0 if a_p >= 0 else -1.0
    sign_s = 1.0 if a_s >= 0 else -1.0
    s_axis = move.secondary if move.secondary is not None else (move.primary + 1) % 3
    remaining = abs(a_p)
    first = True
    while remaining > _TOL or first:
        chunk = min(remaining, cap_x)
        last = (remaining - chunk) <= _TOL
        ex = chunk
        ey = abs(a_s) if last else 0.0
        inner = _xymid_pair_steps(theta_x, theta_y, ex, ey, tpl_steps)
        wrapped = _perm_wrap(inner, _sigma_for(move.primary, s_axis))
        steps += _sign_wrap(wrapped, (move.primary, s_axis), (sign_p, sign_s))
        remaining -= chunk
        first = False
        if last:
            break
    return steps


def _core_db_flow(t_signed, basis, tpl_steps):
    tx, ty = basis.template.tx, basis.template.ty
    cap_x = min(2 * tx, math.pi - 2 * tx)
    cap_y = min(2 * ty, math.pi - 2 * ty) if ty > _TOL else 0.0
    pads, rem = pad_rotations(CartanCoordinate(*t_signed), basis)
    pad_groups = [((p.axes[0], p.axes[1]), p.signs) for p in pads]
    moves = _plan_residual_db(list(rem), pad_groups, tx, ty, cap_x, cap_y)
    borrowed = []
    for mv in moves:
        if mv.borrow_pad is not None:
            borrowed.append(mv.borrow_pad)
    steps = []
    n_pad = 0
    remaining_pads = list(pad_groups)
    for bp in borrowed:
        remaining_pads.remove(bp)
    for axes, signs in remaining_pads:
        steps += _pad_steps(basis, Pad(axes, signs), tpl_steps)
        n_pad += 1
    n_res = 0
    n_inv = len(remaining_pads)
    for mv in moves:
        chunked = _emit_move_db(mv, tx, ty, cap_x, tpl_steps)
        steps += chunked
        n_chunks = max(1, int(math.ceil(abs(mv.amounts[0]) / cap_x - _FLOOR_EPS)))
        n_inv += 2 * n_chunks
        n_pad += n_chunks           # leading gate per sandwich
        n_res += n_chunks
        if mv.borrow_pad is not None:
            n_inv -= 0  # the borrowed pad was simply not emitted separately
    return steps, n_inv, n_pad, n_res


# ---------------------------------------------------------------------------
# Dc flow: convert gate pairs into an effective XX-type gate


def _dc_effective(basis: BasisGate, tpl_steps):
    """Effective XX-type gate built from two Dc invocations (Eq.-18 choice).

    Returns (theta_eff, steps_builder); the builder emits two basis
    invocations realizing exp(i * theta_eff * XX) up to phase.
    """
    tpl = basis.template
    per_axis = []
    for w, th in enumerate((tpl.tx, tpl.ty, abs(tpl.tz))):
        per_axis.append((min(2 * th, abs(PI2 - 2 * th)), w, th))
    theta_eff, w_star, th = max(per_axis, key=lambda e: (e[0], -e[1]))
    shifted = (PI2 - 2 * th) < 2 * th
    z_negative = w_star == 2 and tpl.tz < 0

    def eff_steps():
        p = _PAULI[w_star]
        inner = [_one_q(0, p, "dc-pair")] + tpl_steps() + [_one_q(0, p, "dc-pair")] + tpl_steps()
        # inner = exp(2i theta_w P(x)P) on axis w_star (sign of tz included)
        sigma = _sigma_for(w_star)
        # express in the canonical XX frame
        canon = _perm_wrap(inner, _invert_sigma(sigma))
        negative = z_negative
        if shifted:
            # exp(i(2t - pi/2) XX) * (i XX): flip sign and add the Pauli pair
            canon = canon + [_one_q(0, mc.X, "shift"), _one_q(1, mc.X, "shift")]
            negative = not negative
        if negative:
            canon = _flip_wrap(canon, 0, 2)
        return canon

    return theta_eff, eff_steps


def _invert_sigma(sigma):
    inv = [0, 0, 0]
    for old, new in enumerate(sigma):
        inv[new] = old
    return tuple(inv)


def _core_dc_flow(t_signed, basis, tpl_steps):
    pads, rem = pad_rotations(CartanCoordinate(*t_signed), basis)
    steps = []
    for p in pads:
        steps += _pad_steps(basis, p, tpl_steps)
    theta_eff, eff_steps = _dc_effective(basis, tpl_steps)
    cap2 = 2 * theta_eff
    sub_steps, sub_inv, sub_pad, sub_res = _core_da_flow(list(rem), theta_eff, cap2, eff_steps, inv_cost=2)
    steps += sub_steps
    n_inv = len(pads) + sub_inv
    return steps, n_inv, len(pads) + sub_pad, sub_res


# ---------------------------------------------------------------------------
# Public residual-synthesis surfaces


def synth_residual_da(residual, basis: BasisGate, leading_pad_available: bool = False):
    """Close a sub-threshold residual with at most three sandwich moves.

    `leading_pad_available` models one padding invocation on the largest
    residual axis that the first sandwich may consume.
    """
    if basis.template.tag != "da":
        raise WeylkitError("synth_residual_da expects an XX-type basis")
    theta = basis.template.tx
    pads = [0, 0, 0]
    if leading_pad_available:
        big = max(range(3), key=lambda w: abs(residual[w]))
        pads[big] = 1
    moves = _plan_residual_da(list(residual), pads, theta, min(2 * theta, math.pi - 2 * theta))
    tpl_steps = _template_steps_builder(basis)
    steps = []
    new_gates = 0
    for mv in moves:
        steps += _emit_move_da(mv, theta, tpl_steps)
        new_gates += 1 if mv.borrow else 2
    return steps, new_gates


def synth_residual_db(residual, basis: BasisGate):
    if basis.template.tag != "db":
        raise WeylkitError("synth_residual_db expects an XX+YY-type basis")
    tx, ty = basis.template.tx, basis.template.ty
    cap_x = min(2 * tx, math.pi - 2 * tx)
    cap_y = min(2 * ty, math.pi - 2 * ty)
    moves = _plan_residual_db(list(residual), [], tx, ty, cap_x, cap_y)
    tpl_steps = _template_steps_builder(basis)
    steps = []
    n = 0
    for mv in moves:
        steps += _emit_move_db(mv, tx, ty, cap_x, tpl_steps)
        n += 2 * max(1, int(math.ceil(abs(mv.amounts[0]) / cap_x - _FLOOR_EPS)))
    return steps, n


def synth_residual_dc(residual, basis: BasisGate):
    if basis.template.tag != "dc":
        raise WeylkitError("synth_residual_dc expects an XX+YY+ZZ-type basis")
    tpl_steps = _template_steps_builder(basis)
    theta_eff, eff_steps = _dc_effective(basis, tpl_steps)
    steps, n_inv, _, _ = _core_da_flow(list(residual), theta_eff, 2 * theta_eff, eff_steps, inv_cost=2)
    return steps, n_inv


# ---------------------------------------------------------------------------
# Whole-gate compilation (Algorithm-1 shape)


def _template_steps_builder(basis: BasisGate):
    """Builder emitting steps for the bare template core of the basis gate.

    The basis KAK locals are inverted around each invocation, so the emitted
    block equals exp(i (tx XX + ty YY + tz ZZ)) up to a constant phase.
    """
    f = basis.kak
    pre0, pre1 = f.c.conj().T, f.d.conj().T
    post0, post1 = f.a.conj().T, f.b.conj().T
    label = basis.label

    def build():
        return [
            _one_q(0, pre0, "basis-dress"),
            _one_q(1, pre1, "basis-dress"),
            BasisStep(label),
            _one_q(0, post0, "basis-dress"),
            _one_q(1, post1, "basis-dress"),
        ]

    return build


_KAK_CACHE: dict = {}


def cached_kak(u: np.ndarray) -> KakFactorization:
    key = u.tobytes()
    hit = _KAK_CACHE.get(key)
    if hit is None:
        hit = kak_decompose(u)
        if len(_KAK_CACHE) > 4096:
            _KAK_CACHE.clear()
        _KAK_CACHE[key] = hit
    return hit


def compile_2q(target: np.ndarray, basis: BasisGate, *, verify: bool = True) -> SynthesisPlan:
    """Compile a two-qubit unitary into invocations of one basis gate."""
    target = np.asarray(target, dtype=complex)
    f_t = cached_kak(target)
    t_signed = list(f_t.coord.astuple())
    tpl_steps = _template_steps_builder(basis)
    tag = basis.template.tag
    if tag == "da":
        theta = basis.template.tx
        core, n_inv, n_pad, n_res = _core_da_flow(
            t_signed, theta, min(2 * theta, math.pi - 2 * theta), tpl_steps
        )
    elif tag == "db":
        core, n_inv, n_pad, n_res = _core_db_flow(t_signed, basis, tpl_steps)
    else:
        core, n_inv, n_pad, n_res = _core_dc_flow(t_signed, basis, tpl_steps)

    steps = (
        [_one_q(0, f_t.c, "target-local"), _one_q(1, f_t.d, "target-local")]
        + core
        + [_one_q(0, f_t.a, "target-local"), _one_q(1, f_t.b, "target-local")]
    )
    plan = SynthesisPlan(
        steps=steps,
        basis_count=n_inv,
        target_coord=f_t.coord,
        residual_achieved=float("nan"),
        bases={basis.label: basis},
        n_pad=n_pad,
        n_residual=n_res,
    )
    assembled = assemble_steps(steps, plan.bases)
    tr = np.trace(assembled.conj().T @ target)
    if abs(tr) > 1e-12:
        plan.global_phase = complex(tr / abs(tr))
    plan.residual_achieved = mc.distance_up_to_phase(assembled, target)
    if verify and plan.residual_achieved > 1e-7:
        raise WeylkitError(
            f"synthesis failed: assembled distance {plan.residual_achieved:.3e} "
            f"for target coord {f_t.coord.astuple()} with basis {basis.label}"
        )
    return plan


def compile_2q_mixed(
    target: np.ndarray,
    bases,
    objective: str = "min_count",
    model=None,
) -> SynthesisPlan:
    """Best plan over several bases, including pad-with-one/finish-with-another.

    Objectives: ``min_count`` (fewest invocations), ``min_latency`` and
    ``max_fidelity`` (require a hardware model).
    """
    bases = list(bases)
    if not bases:
        raise WeylkitError("need at least one basis gate")
    if objective not in ("min_count", "min_latency", "max_fidelity"):
        raise WeylkitError(f"unknown objective {objective!r}")
    if objective != "min_count" and model is None:
        raise WeylkitError(f"objective {objective!r} needs a hardware model")

    candidates = [compile_2q(target, b) for b in bases]
    if len(bases) > 1:
        f_t = cached_kak(np.asarray(target, dtype=complex))
        for b_pad in bases:
            for b_res in bases:
                if b_pad.label == b_res.label:
                    continue
                plan = _compile_mixed_pair(target, f_t, b_pad, b_res)
                if plan is not None:
                    candidates.append(plan)

    def score(plan: SynthesisPlan):
        if objective == "min_count":
            return (plan.basis_count, plan.residual_achieved)
        from .hwmodel import plan_latency, plan_fidelity

        if objective == "min_latency":
            return (plan_latency(plan, model), plan.basis_count)
        return (-plan_fidelity(plan, model), plan.basis_count)

    candidates.sort(key=score)
    return candidates[0]


def _compile_mixed_pair(target, f_t, b_pad: BasisGate, b_res: BasisGate):
    """Pad with one basis, then synthesize the leftover with another."""
    try:
        pads, rem = pad_rotations(f_t.coord, b_pad)
    except WeylkitError:
        return None
    if not pads:
        return None
    pad_tpl = _template_steps_builder(b_pad)
    steps = [_one_q(0, f_t.c, "target-local"), _one_q(1, f_t.d, "target-local")]
    for p in pads:
        steps += _pad_steps(b_pad, p, pad_tpl)
    res_tpl = _template_steps_builder(b_res)
    tag = b_res.template.tag
    try:
        if tag == "da":
            theta = b_res.template.tx
            core, n_inv, _, _ = _core_da_flow(list(rem), theta, min(2 * theta, math.pi - 2 * theta), res_tpl)
        elif tag == "db":
            core, n_inv, _, _ = _core_db_flow(list(rem), b_res, res_tpl)
        else:
            core, n_inv, _, _ = _core_dc_flow(list(rem), b_res, res_tpl)
    except WeylkitError:
        return None
    steps += core
    steps += [_one_q(0, f_t.a, "target-local"), _one_q(1, f_t.b, "target-local")]
    bases = {b_pad.label: b_pad, b_res.label: b_res}
    plan = SynthesisPlan(
        steps=steps,
        basis_count=len(pads) + n_inv,
        target_coord=f_t.coord,
        residual_achieved=float("nan"),
        bases=bases,
        n_pad=len(pads),
        n_residual=n_inv,
    )
    assembled = assemble_steps(steps, bases)
    tr = np.trace(assembled.conj().T @ np.asarray(target, dtype=complex))
    if abs(tr) > 1e-12:
        plan.global_phase = complex(tr / abs(tr))
    plan.residual_achieved = mc.distance_up_to_phase(assembled, np.asarray(target, dtype=complex))
    if plan.residual_achieved > 1e-7:
        return None
    return plan


# ---------------------------------------------------------------------------
# Theorem-1 / Corollary-2 lower bound


@dataclass(frozen=True)
class CostBound:
    n_lower: int
    k_t_value: float
    applicable: bool  # True when the sine bound (N*w < pi/4 regime) decided


def lower_bound(coord: CartanCoordinate, basis: BasisGate) -> CostBound:
    """Smallest invocation count not excluded by the sine bound.

    With w the L1 norm of the basis template angles, any circuit of N
    invocations satisfies sin(k_t(U)) <= sin(N*w) while N*w < pi/4; beyond
    that regime the bound degrades to ceil((pi/4)/w).
    """
    tpl = basis.template
    w = {"da": tpl.tx, "db": tpl.tx + tpl.ty, "dc": tpl.tx + tpl.ty + abs(tpl.tz)}[tpl.tag]
    kt = coord.k_t()
    if kt < 1e-12:
        return CostBound(0, kt, True)
    r = min(kt, math.pi - kt)
    binding = min(r, PI4)
    n = int(math.ceil(binding / w - 1e-9))
    return CostBound(max(n, 1), kt, r < PI4)
