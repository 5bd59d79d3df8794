"""Exact arithmetic on Pauli strings and Clifford tableaux.

Encoding conventions used throughout the package:

* An N-qubit Pauli string is stored as two N-bit integers ``x`` and ``z``
  plus a phase exponent ``phase_exp`` (a power of i, mod 4).  Bit i of
  ``x``/``z`` refers to site i+1, with site 1 occupying the MOST significant
  bit, matching the global tensor ordering (site 1 = most significant
  factor of the Kronecker product).
* The canonical (phase_exp = 0) operator for bits (x, z) is

      P(x, z) = i^(x.z) X^x Z^z,      x.z = popcount(x & z),

  i.e. every site carries i^(x_i z_i) X^(x_i) Z^(z_i), so (1,1) is Y and
  every phase-0 string is Hermitian.  The full operator is
  i^phase_exp * P(x, z).
* A Clifford tableau stores the images of the generators X_1..X_N,
  Z_1..Z_N as rows of a 2N x 2N binary matrix (columns 0..N-1 = x bits,
  N..2N-1 = z bits) plus a 2N sign vector: generator g_i maps to
  (-1)^signs[i] * P(row_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidGeneratorImages, NotHermitian, SizeLimitExceeded

DEFAULT_DENSE_LIMIT = 12

_I4 = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])

SINGLE_QUBIT_PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_SITE_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_LETTER_SITE = {v: k for k, v in _SITE_LETTER.items()}
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    """Bit-packed N-qubit Pauli string with a power-of-i phase."""

    n_qubits: int
    x: int
    z: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        mask = (1 << self.n_qubits) - 1
        if not (0 <= self.x <= mask and 0 <= self.z <= mask):
            raise ValueError("x/z bits out of range for qubit count")
        if self.phase_exp not in (0, 1, 2, 3):
            raise ValueError("phase_exp must be in {0,1,2,3}")

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def x_bits(self) -> np.ndarray:
        return _int_to_bits(self.x, self.n_qubits)

    def z_bits(self) -> np.ndarray:
        return _int_to_bits(self.z, self.n_qubits)

    def canonical(self) -> "PauliString":
        """Phase-0 representative of the same class in the quotient group."""
        return PauliString(self.n_qubits, self.x, self.z, 0)

    def __str__(self) -> str:
        letters = []
        for i in range(self.n_qubits):
            shift = self.n_qubits - 1 - i
            letters.append(_SITE_LETTER[((self.x >> shift) & 1, (self.z >> shift) & 1)])
        return _PHASE_PREFIX[self.phase_exp] + "".join(letters)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels like ``"XIZY"``, ``"+XZ"``, ``"-iY"``."""
        s = label.strip()
        phase = 0
        for prefix, p in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
            if s.startswith(prefix):
                phase = p
                s = s[len(prefix):]
                break
        if not s or any(c not in _LETTER_SITE for c in s):
            raise ValueError(f"invalid Pauli label {label!r}")
        x = z = 0
        for c in s:
            xb, zb = _LETTER_SITE[c]
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(s), x, z, phase)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def from_index(cls, n_qubits: int, index: int) -> "PauliString":
        """Phase-0 string number ``index`` in the fixed enumeration order
        (x bits in the high half, z bits in the low half; index 0 = identity)."""
        if not 0 <= index < 4**n_qubits:
            raise ValueError("index out of range")
        return cls(n_qubits, index >> n_qubits, index & ((1 << n_qubits) - 1), 0)

    @property
    def index(self) -> int:
        return (self.x << self.n_qubits) | self.z


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def _bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def pauli_multiply(p: PauliString, q: PauliString) -> tuple[PauliString, complex]:
    """Multiply two Pauli strings.

    Returns the canonical phase-0 representative of the product class and the
    scalar ``c`` such that dense(p) @ dense(q) == c * dense(result).
    """
    if p.n_qubits != q.n_qubits:
        raise ValueError("qubit-count mismatch")
    x3 = p.x ^ q.x
    z3 = p.z ^ q.z
    # per-site phase bookkeeping for i^(x.z) X^x Z^z representatives:
    # i^(x1.z1 + x2.z2 + 2 z1.x2 - x3.z3)
    kappa = (
        (p.x & p.z).bit_count()
        + (q.x & q.z).bit_count()
        + 2 * (p.z & q.x).bit_count()
        - (x3 & z3).bit_count()
    )
    total = (p.phase_exp + q.phase_exp + kappa) % 4
    return PauliString(p.n_qubits, x3, z3, 0), complex(_I4[total])


def pauli_commutes(p: PauliString, q: PauliString) -> bool:
    """True iff the dense realizations commute (symplectic form vanishes)."""
    if p.n_qubits != q.n_qubits:
        raise ValueError("qubit-count mismatch")
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


def pauli_to_dense(p: PauliString, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    """Dense 2^N x 2^N matrix of a Pauli string (site 1 = most significant)."""
    if p.n_qubits > dense_limit:
        raise SizeLimitExceeded(f"{p.n_qubits} qubits exceeds dense limit {dense_limit}")
    d = 1 << p.n_qubits
    cols = np.arange(d)
    rows = cols ^ p.x
    pref = _I4[(p.phase_exp + (p.x & p.z).bit_count()) % 4]
    signs = _parity_signs(cols & p.z)
    m = np.zeros((d, d), dtype=complex)
    m[rows, cols] = pref * signs
    return m


def apply_pauli(p: PauliString, vec: np.ndarray) -> np.ndarray:
    """P @ vec in O(d), without building the dense matrix."""
    d = 1 << p.n_qubits
    if vec.shape[0] != d:
        raise ValueError("dimension mismatch")
    ys = np.arange(d)
    src = ys ^ p.x
    pref = _I4[(p.phase_exp + (p.x & p.z).bit_count()) % 4]
    return pref * _parity_signs(src & p.z) * vec[src]


def pauli_mul_matrix(p: PauliString, m: np.ndarray) -> np.ndarray:
    """P @ m in O(d^2): a signed row permutation of m."""
    d = 1 << p.n_qubits
    if m.shape[0] != d:
        raise ValueError("dimension mismatch")
    ys = np.arange(d)
    src = ys ^ p.x
    pref = _I4[(p.phase_exp + (p.x & p.z).bit_count()) % 4]
    return (pref * _parity_signs(src & p.z))[:, None] * m[src, :]


def _parity_signs(values: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(values) & 1)


def pauli_enumerate_or_sample(
    n_qubits: int,
    mode: str = "all",
    rng: np.random.Generator | None = None,
    count: int | None = None,
) -> Iterator[PauliString]:
    """Stream phase-0 Pauli strings: the full group (identity first) or
    i.i.d. uniform draws (identity included in the support)."""
    if mode == "all":
        for k in range(4**n_qubits):
            yield PauliString.from_index(n_qubits, k)
    elif mode == "uniform":
        if rng is None or count is None:
            raise ValueError("uniform mode needs rng and count")
        for k in rng.integers(0, 4**n_qubits, size=count):
            yield PauliString.from_index(n_qubits, int(k))
    else:
        raise ValueError(f"unknown mode {mode!r}")


def random_pauli(n_qubits: int, rng: np.random.Generator) -> PauliString:
    return PauliString.from_index(n_qubits, int(rng.integers(0, 4**n_qubits)))


# ---------------------------------------------------------------------------
# Walsh-Hadamard machinery for Pauli-basis coefficient tables
# ---------------------------------------------------------------------------


def walsh_hadamard_transform(arr: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along one power-of-two axis:
    out[z] = sum_y (-1)^(z.y) arr[y]."""
    arr = np.asarray(arr)
    n = arr.shape[axis]
    if n & (n - 1):
        raise ValueError("axis length must be a power of two")
    work = np.moveaxis(arr, axis, -1).copy()
    lead = work.shape[:-1]
    h = 1
    while h < n:
        view = work.reshape(*lead, n // (2 * h), 2, h)
        top = view[..., 0, :] + view[..., 1, :]
        bot = view[..., 0, :] - view[..., 1, :]
        view[..., 0, :] = top
        view[..., 1, :] = bot
        h *= 2
    return np.moveaxis(work, -1, axis)


@lru_cache(maxsize=8)
def _popcount_mod4_table(d: int) -> np.ndarray:
    return np.bitwise_count(np.arange(d)).astype(np.int64) % 4


def _phase_grid(d: int) -> np.ndarray:
    """phase[x, z] = i^(x.z) for all pairs of N-bit integers."""
    xs = np.arange(d)
    pc = np.bitwise_count(xs[:, None] & xs[None, :]) % 4
    return _I4[pc]


def pauli_trace_table(op: np.ndarray) -> np.ndarray:
    """All Pauli-basis coefficients of a d x d operator at once.

    Returns table[x, z] = Tr(op @ P(x, z)) for every phase-0 string, computed
    with one Walsh-Hadamard transform per x value:
    Tr(op P) = i^(x.z) sum_y (-1)^(z.y) op[y, y^x].
    """
    op = np.asarray(op, dtype=complex)
    d = op.shape[0]
    ys = np.arange(d)
    gathered = op[ys[None, :], ys[None, :] ^ ys[:, None]]  # [x, y]
    table = walsh_hadamard_transform(gathered, axis=1)  # y -> z
    table *= _phase_grid(d)
    return table


def pauli_expectation_table(psi: np.ndarray) -> np.ndarray:
    """table[x, z] = <psi| P(x, z) |psi> for every phase-0 string."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    ys = np.arange(d)
    gathered = psi[None, :] * psi.conj()[ys[None, :] ^ ys[:, None]]  # [x, y]
    table = walsh_hadamard_transform(gathered, axis=1)
    table *= _phase_grid(d)
    return table


# ---------------------------------------------------------------------------
# Clifford tableaux
# ---------------------------------------------------------------------------


def _symplectic_j(n: int) -> np.ndarray:
    eye = np.eye(n, dtype=np.uint8)
    zero = np.zeros((n, n), dtype=np.uint8)
    return np.block([[zero, eye], [eye, zero]])


@dataclass
class CliffordTableau:
    """Binary symplectic matrix plus signs: the conjugation action of a
    Clifford unitary on the Pauli generators, up to global phase."""

    n_qubits: int
    mat: np.ndarray  # (2N, 2N) uint8, rows = images of X_1..X_N, Z_1..Z_N
    signs: np.ndarray  # (2N,) uint8

    def __post_init__(self):
        n2 = 2 * self.n_qubits
        self.mat = np.asarray(self.mat, dtype=np.uint8) % 2
        self.signs = np.asarray(self.signs, dtype=np.uint8) % 2
        if self.mat.shape != (n2, n2) or self.signs.shape != (n2,):
            raise ValueError("tableau shape mismatch")
        if not self.is_symplectic():
            raise InvalidGeneratorImages("rows do not preserve the symplectic form")

    def is_symplectic(self) -> bool:
        j = _symplectic_j(self.n_qubits)
        return bool(np.array_equal(self.mat @ j @ self.mat.T % 2, j))

    @classmethod
    def identity(cls, n_qubits: int) -> "CliffordTableau":
        return cls(n_qubits, np.eye(2 * n_qubits, dtype=np.uint8),
                   np.zeros(2 * n_qubits, dtype=np.uint8))

    def row_pauli(self, i: int) -> tuple[PauliString, int]:
        """Image of generator i (0..N-1: X_i, N..2N-1: Z_i) as a phase-0
        string plus its +-1 sign."""
        n = self.n_qubits
        x = _bits_to_int(self.mat[i, :n])
        z = _bits_to_int(self.mat[i, n:])
        return PauliString(n, x, z, 0), -1 if self.signs[i] else 1

    def conjugate(self, p: PauliString) -> tuple[PauliString, int]:
        """C P C^dag for a Hermitian string: phase-0 result plus a +-1 sign."""
        if p.n_qubits != self.n_qubits:
            raise ValueError("qubit-count mismatch")
        if not p.is_hermitian:
            raise NotHermitian("conjugation is defined for Hermitian strings")
        n = self.n_qubits
        acc = PauliString.identity(n)
        kappa = 0  # accumulated power of i from the multiplication cocycles
        neg = 0  # accumulated -1 exponent from row signs
        for i in range(n):
            if (p.x >> (n - 1 - i)) & 1:
                img, sgn = self.row_pauli(i)
                acc, c = pauli_multiply(acc, img)
                kappa = (kappa + _phase_power(c)) % 4
                neg ^= sgn < 0
        for i in range(n):
            if (p.z >> (n - 1 - i)) & 1:
                img, sgn = self.row_pauli(n + i)
                acc, c = pauli_multiply(acc, img)
                kappa = (kappa + _phase_power(c)) % 4
                neg ^= sgn < 0
        total = (p.phase_exp + (p.x & p.z).bit_count() + kappa) % 4
        if total not in (0, 2):
            raise AssertionError("conjugation of a Hermitian string must give +-1")
        sign = (1 if total == 0 else -1) * (-1 if neg else 1)
        return acc, sign

    def compose(self, first: "CliffordTableau") -> "CliffordTableau":
        """Tableau of self . first (apply `first`, then `self`)."""
        if first.n_qubits != self.n_qubits:
            raise ValueError("qubit-count mismatch")
        images = []
        for i in range(2 * self.n_qubits):
            p1, s1 = first.row_pauli(i)
            p2, s2 = self.conjugate(p1)
            images.append((p2, s1 * s2))
        return clifford_from_generator_images(images)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CliffordTableau)
            and self.n_qubits == other.n_qubits
            and np.array_equal(self.mat, other.mat)
            and np.array_equal(self.signs, other.signs)
        )


def _phase_power(c: complex) -> int:
    return int(np.argmin(np.abs(_I4 - c)))


def clifford_from_generator_images(
    images: Sequence[tuple[PauliString, int]],
) -> CliffordTableau:
    """Build a tableau from prescribed images of X_1..X_N, Z_1..Z_N.

    Each entry is (phase-0 Hermitian string, sign in {+1, -1}).  Raises
    InvalidGeneratorImages if the images break the commutation pattern.
    """
    if not images:
        raise InvalidGeneratorImages("no images given")
    n = images[0][0].n_qubits
    if len(images) != 2 * n:
        raise InvalidGeneratorImages(f"expected {2 * n} images, got {len(images)}")
    mat = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    signs = np.zeros(2 * n, dtype=np.uint8)
    for i, (p, s) in enumerate(images):
        if p.n_qubits != n:
            raise InvalidGeneratorImages("qubit-count mismatch among images")
        if p.phase_exp != 0:
            raise InvalidGeneratorImages("images must be phase-0 strings")
        if s not in (1, -1):
            raise InvalidGeneratorImages("signs must be +-1")
        mat[i, :n] = _int_to_bits(p.x, n)
        mat[i, n:] = _int_to_bits(p.z, n)
        signs[i] = 1 if s == -1 else 0
    return CliffordTableau(n, mat, signs)


def _symp_inner(u: np.ndarray, v: np.ndarray, n: int) -> int:
    return int((u[:n] @ v[n:] + u[n:] @ v[:n]) % 2)


def _f2_independent(vectors: list[np.ndarray], expected: int) -> list[np.ndarray]:
    """Keep a maximal linearly independent subset (deterministic order)."""
    rows: list[np.ndarray] = []
    pivots: list[int] = []
    kept: list[np.ndarray] = []
    for v in vectors:
        r = v.copy()
        for row, piv in zip(rows, pivots):
            if r[piv]:
                r ^= row
        nz = np.flatnonzero(r)
        if nz.size:
            rows.append(r)
            pivots.append(int(nz[0]))
            kept.append(v)
    if len(kept) != expected:
        raise AssertionError("unexpected rank in symplectic complement")
    return kept


def random_clifford(n_qubits: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniformly random tableau (exact uniformity, seeded).

    The symplectic matrix is sampled by building hyperbolic pairs
    sequentially: the image of X_k is uniform over the 4^m - 1 nonzero
    vectors of the remaining symplectic complement, the image of Z_k is
    uniform over the 2^(2m-1) partners with unit pairing, and the
    complement is projected out.  The choice counts multiply to
    prod_j (4^j - 1) 2^(2j-1) = |Sp(2N, F2)|, so every symplectic matrix
    arises from exactly one choice sequence.  Signs are 2N fair bits.
    """
    n = n_qubits
    basis = [row.copy() for row in np.eye(2 * n, dtype=np.uint8)]
    xrows: list[np.ndarray] = []
    zrows: list[np.ndarray] = []
    for step in range(n):
        m = n - step
        k = int(rng.integers(1, 4**m))
        f = np.zeros(2 * n, dtype=np.uint8)
        for i in range(2 * m):
            if (k >> i) & 1:
                f ^= basis[i]
        pair = [_symp_inner(f, b, n) for b in basis]
        j0 = pair.index(1)  # exists: the form is nondegenerate on the span
        kern = [basis[i] ^ (basis[j0] if pair[i] else 0)
                for i in range(2 * m) if i != j0]
        g = basis[j0].copy()
        for bit, kv in zip(rng.integers(0, 2, size=2 * m - 1), kern):
            if bit:
                g ^= kv
        xrows.append(f)
        zrows.append(g)
        if m > 1:
            proj = []
            for b in basis:
                v = b.copy()
                if _symp_inner(v, g, n):
                    v ^= f
                if _symp_inner(v, f, n):
                    v ^= g
                proj.append(v)
            basis = _f2_independent(proj, 2 * m - 2)
    mat = np.vstack(xrows + zrows)
    signs = rng.integers(0, 2, size=2 * n).astype(np.uint8)
    return CliffordTableau(n, mat, signs)


def clifford_to_dense(
    c: CliffordTableau, dense_limit: int = DEFAULT_DENSE_LIMIT
) -> np.ndarray:
    """Unitary matrix realizing the tableau's conjugation action.

    Unique up to global phase; the phase is fixed by making the first
    nonzero entry (column-major scan) real positive.
    """
    n = c.n_qubits
    if n > dense_limit:
        raise SizeLimitExceeded(f"{n} qubits exceeds dense limit {dense_limit}")
    d = 1 << n
    # |psi0> = state stabilized by the signed images of Z_1..Z_N
    proj = np.eye(d, dtype=complex)
    for i in range(n):
        img, sgn = c.row_pauli(n + i)
        proj = (proj + sgn * pauli_mul_matrix(img, proj)) / 2.0
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    psi0 = proj[:, col]
    nrm = np.linalg.norm(psi0)
    if nrm < 1e-12:
        raise AssertionError("stabilizer projector produced a null column")
    psi0 = psi0 / nrm
    # column b of the unitary = (image of X^b) |psi0>
    u = np.empty((d, d), dtype=complex)
    for b in range(d):
        img, sgn = c.conjugate(PauliString(n, b, 0, 0))
        u[:, b] = sgn * apply_pauli(img, psi0)
    return fix_global_phase(u)


def fix_global_phase(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Divide by the phase of the first nonzero entry in column-major order."""
    flat = m.flatten(order="F")
    idx = np.flatnonzero(np.abs(flat) > tol)
    if idx.size == 0:
        return m
    return m * (np.abs(flat[idx[0]]) / flat[idx[0]])
