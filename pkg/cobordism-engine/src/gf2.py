"""
Linear algebra over the two-element field.

Vectors and matrices store 0/1 entries in numpy uint8 arrays. Gauss-Jordan
elimination always takes the lowest-index row carrying a 1 in the pivot
column, so every basis and coordinate vector built here is reproducible.
"""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dependencies import DomainError

logger = logging.getLogger(__name__)


class GF2Error(DomainError):
    """Dimension mismatch or violated precondition in GF(2) algebra"""


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class BitVector:
    """Immutable vector over GF(2)"""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int]):
        arr = np.array(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.int64)
        if arr.ndim != 1:
            raise GF2Error(f"bit vector needs a flat sequence, got shape {arr.shape}")
        self._bits = _frozen((arr & 1).astype(np.uint8))

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> "BitVector":
        arr = np.zeros(length, dtype=np.uint8)
        for i in indices:
            if not 0 <= i < length:
                raise GF2Error(f"index {i} outside a vector of length {length}")
            arr[i] ^= 1
        return cls(arr)

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        if any(ch not in "01" for ch in text):
            raise GF2Error(f"bit string {text!r} may only contain 0 and 1")
        return cls([int(ch) for ch in text])

    @classmethod
    def from_int(cls, mask: int, length: int) -> "BitVector":
        return cls([(mask >> i) & 1 for i in range(length)])

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.shape[0])

    def __len__(self) -> int:
        return self.length

    def __iter__(self) -> Iterator[int]:
        return (int(b) for b in self._bits)

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i])

    def _check(self, other: "BitVector") -> None:
        if not isinstance(other, BitVector):
            raise GF2Error(f"expected BitVector, got {type(other).__name__}")
        if other.length != self.length:
            raise GF2Error(f"length mismatch: {self.length} vs {other.length}")

    def __add__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self._bits ^ other._bits)

    def __radd__(self, other):
        # lets sum() start from 0
        if isinstance(other, int) and other == 0:
            return self
        return self.__add__(other)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self._bits & other._bits)

    def dot(self, other: "BitVector") -> int:
        self._check(other)
        return int(np.bitwise_and(self._bits, other._bits).sum() & 1)

    def is_zero(self) -> bool:
        return not self._bits.any()

    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self._bits))

    @property
    def weight(self) -> int:
        return int(self._bits.sum())

    def to_int(self) -> int:
        return sum(1 << i for i in self.support())

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self._bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.length, self._bits.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector('{self.to_string()}')"


class BitMatrix:
    """Immutable matrix over GF(2)"""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=np.int64)
        if arr.ndim != 2:
            raise GF2Error(f"bit matrix needs a 2-d array, got shape {arr.shape}")
        self._entries = _frozen((arr & 1).astype(np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_columns(cls, columns: Sequence[BitVector], length: int) -> "BitMatrix":
        arr = np.zeros((length, len(columns)), dtype=np.uint8)
        for j, col in enumerate(columns):
            if col.length != length:
                raise GF2Error(f"column {j} has length {col.length}, expected {length}")
            arr[:, j] = col.bits
        return cls(arr)

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], length: int) -> "BitMatrix":
        return cls.from_columns(rows, length).T

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def rows(self) -> int:
        return int(self._entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self._entries.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix(self._entries.T)

    def row(self, i: int) -> BitVector:
        return BitVector(self._entries[i, :])

    def column(self, j: int) -> BitVector:
        return BitVector(self._entries[:, j])

    def columns(self) -> List[BitVector]:
        return [self.column(j) for j in range(self.cols)]

    def take_rows(self, indices: Sequence[int]) -> "BitMatrix":
        return BitMatrix(self._entries[list(indices), :].reshape(len(indices), self.cols))

    def take_columns(self, indices: Sequence[int]) -> "BitMatrix":
        return BitMatrix(self._entries[:, list(indices)].reshape(self.rows, len(indices)))

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.rows != self.rows:
            raise GF2Error(f"cannot stack {self.shape} with {other.shape}")
        return BitMatrix(np.hstack([self._entries, other._entries]))

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if other.length != self.cols:
                raise GF2Error(f"cannot apply a {self.shape} matrix to a vector of length {other.length}")
            return BitVector(self._entries.astype(np.int64) @ other.bits.astype(np.int64))
        if isinstance(other, BitMatrix):
            if other.rows != self.cols:
                raise GF2Error(f"cannot multiply {self.shape} by {other.shape}")
            return BitMatrix(self._entries.astype(np.int64) @ other._entries.astype(np.int64))
        return NotImplemented

    def is_zero(self) -> bool:
        return not self._entries.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._entries, other._entries))

    def __hash__(self) -> int:
        return hash((self.shape, self._entries.tobytes()))

    def __repr__(self) -> str:
        body = "; ".join("".join(str(int(b)) for b in row) for row in self._entries)
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


class RREF(NamedTuple):
    matrix: BitMatrix
    pivots: List[int]
    rank: int


class Quotient(NamedTuple):
    basis: List[BitVector]
    coords: Callable[[BitVector], BitVector]


def _eliminate(work: np.ndarray, ncols: int) -> List[int]:
    """In-place Gauss-Jordan over the first ncols columns; returns the pivot columns."""
    pivots: List[int] = []
    nrows = work.shape[0]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        hits = np.flatnonzero(work[r:, c])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        others = np.flatnonzero(work[:, c])
        others = others[others != r]
        if others.size:
            work[others] ^= work[r]
        pivots.append(c)
        r += 1
    return pivots


def rref(A: BitMatrix) -> RREF:
    work = A.entries.copy()
    pivots = _eliminate(work, A.cols)
    return RREF(BitMatrix(work), pivots, len(pivots))


def rank(A: BitMatrix) -> int:
    return rref(A).rank


def solve(A: BitMatrix, b: BitVector) -> Optional[BitVector]:
    """Solve A x = b, setting every free variable to zero; None when b is outside the image."""
    if b.length != A.rows:
        raise GF2Error(f"right-hand side has length {b.length}, matrix has {A.rows} rows")
    work = np.hstack([A.entries, b.bits.reshape(-1, 1)]).astype(np.uint8)
    pivots = _eliminate(work, A.cols)
    r = len(pivots)
    if work[r:, -1].any():
        return None
    x = np.zeros(A.cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = work[i, -1]
    return BitVector(x)


def kernel_basis(A: BitMatrix) -> List[BitVector]:
    R, pivots, _ = rref(A)
    entries = R.entries
    pivot_set = set(pivots)
    basis = []
    for f in range(A.cols):
        if f in pivot_set:
            continue
        v = np.zeros(A.cols, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = entries[i, f]
        basis.append(BitVector(v))
    return basis


class SpanSolver:
    """
    Coordinates with respect to a fixed list of independent vectors.

    Row-reducing [M | I] gives E with E M = [I; 0]: the top rows of E are a
    left inverse of M and the remaining rows vanish exactly on span(M).
    """

    def __init__(self, vectors: Sequence[BitVector], length: int):
        m = len(vectors)
        M = BitMatrix.from_columns(vectors, length)
        work = np.hstack([M.entries, np.eye(length, dtype=np.uint8)])
        pivots = _eliminate(work, m)
        if len(pivots) != m:
            raise GF2Error(f"{m} vectors are linearly dependent (rank {len(pivots)})")
        self.length = length
        self.size = m
        self._left = _frozen(work[:m, m:].astype(np.int64))
        self._check = _frozen(work[m:, m:].astype(np.int64))

    def contains(self, v: BitVector) -> bool:
        if v.length != self.length:
            raise GF2Error(f"vector length {v.length} does not match span length {self.length}")
        return not ((self._check @ v.bits.astype(np.int64)) & 1).any()

    def coordinates(self, v: BitVector) -> BitVector:
        if not self.contains(v):
            raise GF2Error("vector is not in the span")
        return BitVector(self._left @ v.bits.astype(np.int64))


def quotient_basis(
    cycles: Sequence[BitVector],
    boundaries: Sequence[BitVector],
    length: Optional[int] = None,
) -> Quotient:
    """
    Basis of span(cycles) / span(boundaries) and the coordinate map onto it.

    The basis is drawn from the given cycles: independent boundaries come
    first in the elimination, and the cycles that add rank on top of them
    form the basis. coords rejects vectors outside span(cycles).
    """
    vectors = list(cycles) + list(boundaries)
    if length is None:
        if not vectors:
            raise GF2Error("length is required when both lists are empty")
        length = vectors[0].length
    for v in vectors:
        if v.length != length:
            raise GF2Error(f"vector length {v.length} differs from {length}")

    Z = BitMatrix.from_columns(list(cycles), length)
    B = BitMatrix.from_columns(list(boundaries), length)
    if rank(Z.hstack(B)) != rank(Z):
        raise GF2Error("boundaries are not contained in the span of the cycles")

    independent = [boundaries[j] for j in rref(B).pivots]
    combined = independent + list(cycles)
    nb = len(independent)
    pivots = rref(BitMatrix.from_columns(combined, length)).pivots
    basis = [combined[j] for j in pivots if j >= nb]
    solver = SpanSolver(independent + basis, length)
    logger.debug(f"Quotient of {len(cycles)} cycles by {nb} independent boundaries has dimension {len(basis)}")

    def coords(cycle: BitVector) -> BitVector:
        return BitVector(solver.coordinates(cycle).bits[nb:])

    return Quotient(basis, coords)
