"""KAK decomposition, Weyl-chamber canonicalization and local equivalence.

Any two-qubit unitary factors as

    U = phase * (a (x) b) * exp(i (nx XX + ny YY + nz ZZ)) * (c (x) d)

with ``0 <= |nz| <= ny <= nx <= pi/4`` and ``nz >= 0`` on the ``nx = pi/4``
boundary.  The triple ``(nx, ny, nz)`` is the Cartan coordinate; two gates
are locally equivalent iff their coordinates agree.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import matcore as mc
from .errors import ConvergenceError, WeylkitError

PI4 = math.pi / 4
PI2 = math.pi / 2

ANGLE_ATOL = 1e-9  # coordinate comparisons
_CHAMBER_EDGE_ATOL = 1e-10

# exp(i diag(eta)) in the magic basis equals exp(i g) * exp(i k . P) with
# eta = T @ (g, kx, ky, kz); columns verified against the magic-basis
# diagonalization of XX, YY, ZZ in the test suite.
_T = np.array(
    [
        [1, 1, -1, 1],
        [1, 1, 1, -1],
        [1, -1, -1, -1],
        [1, -1, 1, 1],
    ],
    dtype=float,
)
_T_INV = _T.T / 4.0

# Axis permutations realized by conjugation with W (x) W.  Entry key sigma
# maps old axis index -> new axis index: coefficient t[i] lands on axis
# sigma[i] of the conjugated exponential.
_S_DG = mc.S.conj().T
_PERM_CLIFFORD = {
    (0, 1, 2): mc.I2,
    (1, 0, 2): mc.S,                # swap x,y
    (2, 1, 0): mc.H,                # swap x,z
    (0, 2, 1): mc.H @ mc.S @ mc.H,  # swap y,z
    (1, 2, 0): mc.H @ mc.S,         # cycle x->y->z->x
    (2, 0, 1): (mc.H @ mc.S).conj().T,
}

# Conjugation by P (x) I flips the sign of the two axes other than P's.
_FLIP_PAULI = {(0, 1): mc.Z, (0, 2): mc.Y, (1, 2): mc.X}


@dataclass(frozen=True)
class CartanCoordinate:
    """Canonical Weyl-chamber coordinate (radians)."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        if not self.in_chamber():
            raise WeylkitError(f"coordinate {self.astuple()} violates Weyl-chamber invariants")

    def astuple(self):
        return (self.nx, self.ny, self.nz)

    def in_chamber(self, atol: float = _CHAMBER_EDGE_ATOL) -> bool:
        nx, ny, nz = self.nx, self.ny, self.nz
        ok = -atol <= abs(nz) <= ny + atol and ny <= nx + atol and nx <= PI4 + atol
        if ok and nx >= PI4 - atol:
            ok = nz >= -atol
        return ok

    def k_t(self) -> float:
        return self.nx + self.ny + abs(self.nz)

    def isclose(self, other: "CartanCoordinate", atol: float = ANGLE_ATOL) -> bool:
        return (
            abs(self.nx - other.nx) <= atol
            and abs(self.ny - other.ny) <= atol
            and abs(self.nz - other.nz) <= atol
        )


@dataclass(frozen=True)
class TemplateClass:
    """Template of a two-qubit gate: Da(tx), Db(tx,ty) or Dc(tx,ty,tz)."""

    tag: str  # "da" | "db" | "dc"
    angles: tuple

    @property
    def tx(self):
        return self.angles[0]

    @property
    def ty(self):
        return self.angles[1] if len(self.angles) > 1 else 0.0

    @property
    def tz(self):
        return self.angles[2] if len(self.angles) > 2 else 0.0


@dataclass(frozen=True)
class KakFactorization:
    """U = phase * (a (x) b) * exp(i coord . P) * (c (x) d)."""

    phase: complex
    g_branch: float  # 0 or pi/2, the Eq.-24 global-phase branch
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    coord: CartanCoordinate


def core_matrix(coord) -> np.ndarray:
    """exp(i (nx XX + ny YY + nz ZZ)) for a coordinate or raw triple."""
    nx, ny, nz = coord.astuple() if isinstance(coord, CartanCoordinate) else coord
    return mc.rotation_2q("XX", nx) @ mc.rotation_2q("YY", ny) @ mc.rotation_2q("ZZ", nz)


def canonicalize(raw):
    """Map an unrestricted rotation triple into the Weyl chamber.

    Returns ``(coord, (l0, l1), (r0, r1), phase)`` satisfying

        (l0 (x) l1) exp(i raw . P) (r0 (x) r1) = phase * exp(i coord . P)

    with the corrections drawn from tensor products of Clifford factors.
    """
    t = [float(v) for v in raw]
    l0 = l1 = r0 = r1 = mc.I2
    phase = 1.0 + 0.0j

    def conj(c0, c1):
        nonlocal l0, l1, r0, r1
        l0 = c0 @ l0
        l1 = c1 @ l1
        r0 = r0 @ c0.conj().T
        r1 = r1 @ c1.conj().T

    def shift(w, k):
        # t[w] -> t[w] - k*pi/2 at the cost of a Pauli pair and a phase
        nonlocal phase, r0, r1
        if k == 0:
            return
        t[w] -= k * PI2
        p = (mc.X, mc.Y, mc.Z)[w]
        if k % 2:
            r0 = r0 @ p
            r1 = r1 @ p
        phase *= (1j) ** k

    def flip(wa, wb):
        pair = tuple(sorted((wa, wb)))
        p = _FLIP_PAULI[pair]
        conj(p, mc.I2)
        t[wa] = -t[wa]
        t[wb] = -t[wb]

    # 1. shift every component into (-pi/4, pi/4]
    for w in range(3):
        k = math.floor((t[w] + PI4) / PI2)
        if t[w] - k * PI2 <= -PI4 + 1e-15:
            k -= 1
        shift(w, k)

    # 2. sort by magnitude (descending) with an axis-permuting Clifford
    order = sorted(range(3), key=lambda w: -abs(t[w]))
    sigma = tuple(order.index(w) for w in range(3))  # old axis -> new axis
    if sigma != (0, 1, 2):
        w = _PERM_CLIFFORD[sigma]
        conj(w, w)
        t = [t[order[0]], t[order[1]], t[order[2]]]

    # 3. sign-flip pairs until tx, ty >= 0 (single-axis flips do not exist)
    if t[0] < 0 and t[1] < 0:
        flip(0, 1)
    elif t[0] < 0:
        flip(0, 2)
    elif t[1] < 0:
        flip(1, 2)

    # 4. boundary rule: at nx = pi/4 enforce nz >= 0
    if t[0] >= PI4 - _CHAMBER_EDGE_ATOL and t[2] < 0:
        flip(0, 2)
        shift(0, -1)

    t = [0.0 if abs(v) < 1e-15 else v for v in t]
    coord = CartanCoordinate(min(t[0], PI4), min(t[1], t[0], PI4), t[2])
    return coord, (l0, l1), (r0, r1), phase


def _joint_diagonalize(m2: np.ndarray):
    """Orthogonal Q with Q^T m2 Q diagonal, for unitary symmetric m2.

    Real and imaginary parts of m2 are commuting real symmetric matrices; a
    deterministically seeded random combination splits any eigenspaces that
    only one part resolves.
    """
    a = (m2.real + m2.real.T) / 2.0
    b = (m2.imag + m2.imag.T) / 2.0
    rng = np.random.default_rng(0x5EED)
    for trial in range(24):
        if trial == 0:
            c0, c1 = 1.0, 0.0
        elif trial == 1:
            c0, c1 = 0.0, 1.0
        else:
            c0, c1 = rng.normal(size=2)
        try:
            _, q = mc.eig_sym4(c0 * a + c1 * b)
        except ConvergenceError:
            continue
        d = q.T @ m2 @ q
        if np.abs(d - np.diag(np.diag(d))).max() < 1e-10:
            return q, np.diag(d).copy()
    raise ConvergenceError("failed to diagonalize the magic-basis Gram matrix")


def _split_product_gate(u4: np.ndarray):
    """Split an exact tensor product u4 = a (x) b into SU(2) factors.

    Returns ``(a, b, phase)`` with det(a) = det(b) = 1 and
    ``u4 = phase * kron(a, b)``.
    """
    view = u4.reshape(2, 2, 2, 2)  # indices [i, k, j, l] with a[i,j] b[k,l]
    blocks = view.transpose(0, 2, 1, 3)  # [i, j, k, l]
    norms = np.abs(blocks).sum(axis=(2, 3))
    i, j = np.unravel_index(int(np.argmax(norms)), (2, 2))
    b = blocks[i, j].copy()
    det_b = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
    if abs(det_b) < 1e-12:
        raise WeylkitError("matrix is not a tensor product of one-qubit gates")
    b /= cmath.sqrt(det_b)
    a = np.empty((2, 2), dtype=complex)
    for ii in range(2):
        for jj in range(2):
            a[ii, jj] = np.trace(b.conj().T @ blocks[ii, jj]) / 2.0
    det_a = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det_a) < 1e-12:
        raise WeylkitError("matrix is not a tensor product of one-qubit gates")
    a /= cmath.sqrt(det_a)
    recon = np.kron(a, b)
    phase = np.trace(recon.conj().T @ u4) / 4.0
    phase /= abs(phase)
    if np.abs(u4 - phase * recon).max() > 1e-9:
        raise WeylkitError("matrix is not a tensor product of one-qubit gates")
    return a, b, complex(phase)


def _su2ify(m: np.ndarray):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    root = cmath.sqrt(det)
    return m / root, complex(root)


def kak_decompose(u: np.ndarray) -> KakFactorization:
    """KAK decomposition of a two-qubit unitary.

    Route: map to the magic basis, jointly diagonalize the symmetric Gram
    matrix U_B U_B^T to obtain the left orthogonal factor and the eigenphases
    2*eta_i, recover the right factor, invert the integer relation between
    (eta_0..eta_3) and (g, kx, ky, kz), and canonicalize the raw triple into
    the Weyl chamber, folding all corrections into the local gates.
    """
    u = mc.require_unitary(np.asarray(u, dtype=complex), what="kak input")
    if u.shape != (4, 4):
        raise WeylkitError("kak_decompose expects a 4x4 matrix")
    u_su, _ = mc.su_normalize(u)
    ub = mc.MAGIC.conj().T @ u_su @ mc.MAGIC
    m2 = ub @ ub.T

    q_l, lam = _joint_diagonalize(m2)
    if np.linalg.det(q_l) < 0:
        q_l = q_l.copy()
        q_l[:, 0] = -q_l[:, 0]
        lam = np.diag(q_l.T @ m2 @ q_l).copy()

    eta = np.angle(lam) / 2.0
    d_half = np.exp(1j * eta)
    k_rt = (d_half.conj()[:, None]) * (q_l.T @ ub)  # candidate Q_R^T
    if np.linalg.det(k_rt.real) < 0:
        eta[0] += math.pi
        d_half = np.exp(1j * eta)
        k_rt = (d_half.conj()[:, None]) * (q_l.T @ ub)
    if np.abs(k_rt.imag).max() > 1e-7:
        raise ConvergenceError("right orthogonal factor came out non-real")
    k_rt = k_rt.real

    gk = _T_INV @ eta
    g = float(gk[0])
    raw = (float(gk[1]), float(gk[2]), float(gk[3]))
    # g is pi/2 * integer by construction; reduce the branch to {0, pi/2}
    g_mod = g % math.pi
    if min(abs(g_mod), abs(g_mod - math.pi)) > 1e-8 and abs(g_mod - PI2) > 1e-8:
        raise ConvergenceError(f"global-phase branch {g} not on the pi/2 grid")
    g_branch = 0.0 if min(abs(g_mod), abs(g_mod - math.pi)) <= 1e-8 else PI2

    left4 = mc.MAGIC @ q_l @ mc.MAGIC.conj().T
    right4 = mc.MAGIC @ k_rt @ mc.MAGIC.conj().T
    a, b, _ = _split_product_gate(left4)
    c, d, _ = _split_product_gate(right4)

    coord, (l0, l1), (r0, r1), _cphase = canonicalize(raw)
    # exp(i raw.P) = (l0 (x) l1)^dag phase exp(i coord.P) (r0 (x) r1)^dag
    a2, _ = _su2ify(a @ l0.conj().T)
    b2, _ = _su2ify(b @ l1.conj().T)
    c2, _ = _su2ify(r0.conj().T @ c)
    d2, _ = _su2ify(r1.conj().T @ d)

    candidate = np.kron(a2, b2) @ core_matrix(coord) @ np.kron(c2, d2)
    phase = np.trace(candidate.conj().T @ u) / 4.0
    mag = abs(phase)
    if mag < 1 - 1e-6:
        raise ConvergenceError(f"kak reconstruction lost norm: |phase| = {mag}")
    phase /= mag
    return KakFactorization(complex(phase), g_branch, a2, b2, c2, d2, coord)


def kak_recompose(f: KakFactorization) -> np.ndarray:
    return f.phase * (np.kron(f.a, f.b) @ core_matrix(f.coord) @ np.kron(f.c, f.d))


def k_t(u_or_coord) -> float:
    """L1 norm of the Cartan coordinate (the entangling-power measure)."""
    if isinstance(u_or_coord, CartanCoordinate):
        return u_or_coord.k_t()
    if isinstance(u_or_coord, KakFactorization):
        return u_or_coord.coord.k_t()
    return kak_decompose(u_or_coord).coord.k_t()


def locally_equivalent(u: np.ndarray, v: np.ndarray, tol: float = ANGLE_ATOL) -> bool:
    cu = kak_decompose(u).coord
    cv = kak_decompose(v).coord
    return cu.isclose(cv, atol=tol)


def classify_template(coord: CartanCoordinate, atol: float = ANGLE_ATOL) -> TemplateClass:
    nx, ny, nz = coord.astuple()
    if abs(ny) <= atol and abs(nz) <= atol:
        return TemplateClass("da", (nx,))
    if abs(nz) <= atol:
        return TemplateClass("db", (nx, ny))
    return TemplateClass("dc", (nx, ny, nz))
