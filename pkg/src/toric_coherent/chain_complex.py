"""Z2 chain complex of the L x L torus.

Edges carry the qubits.  Horizontal edge ``h(r, c) = r*L + c`` joins vertex
``(r, c)`` to ``(r, c+1)``; vertical edge ``v(r, c) = L*L + r*L + c`` joins
``(r, c)`` to ``(r+1, c)`` (indices mod L).  Face ``f(r, c)`` is bounded by
``h(r, c)``, ``h(r+1, c)``, ``v(r, c)`` and ``v(r, c+1)``.  Vertex ``(r, c)``
has index ``r*L + c``.

Chains and syndromes are bit vectors stored as Python ints, bit ``i`` being
the coefficient of edge (or vertex) ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Sequence, Tuple

from toric_coherent.errors import (
    DimensionError,
    InvalidSyndromeError,
    PreconditionError,
)


@dataclass(frozen=True)
class _BitVector:
    bits: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise DimensionError(f"negative length {self.length}")
        if self.bits < 0 or self.bits >> self.length:
            raise DimensionError(
                f"bits {self.bits:#x} do not fit in length {self.length}"
            )

    @classmethod
    def zero(cls, length: int):
        return cls(0, length)

    @classmethod
    def from_indices(cls, indices: Iterable[int], length: int):
        bits = 0
        for i in indices:
            if not 0 <= i < length:
                raise DimensionError(f"index {i} out of range for length {length}")
            bits ^= 1 << i
        return cls(bits, length)

    @property
    def weight(self) -> int:
        return bin(self.bits).count("1")

    def support(self) -> List[int]:
        return list(_iter_bits(self.bits))

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other.length != self.length:
            raise DimensionError(
                f"cannot add vectors of length {self.length} and {other.length}"
            )
        return type(self)(self.bits ^ other.bits, self.length)

    def __bool__(self) -> bool:
        return self.bits != 0

    def hex(self) -> str:
        width = max(1, -(-self.length // 4))
        return format(self.bits, f"0{width}x")

    @classmethod
    def from_hex(cls, text: str, length: int):
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        try:
            bits = int(text, 16) if text else 0
        except ValueError as exc:
            raise DimensionError(f"not a hex bit vector: {text!r}") from exc
        return cls(bits, length)


class Chain(_BitVector):
    """An X-error chain: one bit per edge."""


class Syndrome(_BitVector):
    """A set of flipped vertex checks: one bit per vertex."""


@dataclass(frozen=True)
class ClassLabel:
    """Element of H1 = Z2 x Z2, as the parities ``(w1, w2)`` of cut crossings."""

    w1: int
    w2: int

    def __post_init__(self) -> None:
        if self.w1 not in (0, 1) or self.w2 not in (0, 1):
            raise PreconditionError(f"class parities must be 0/1, got {(self.w1, self.w2)}")

    @property
    def index(self) -> int:
        # ordering (0,0) < (1,0) < (0,1) < (1,1)
        return self.w1 + 2 * self.w2

    @classmethod
    def from_index(cls, index: int) -> "ClassLabel":
        if not 0 <= index < 4:
            raise PreconditionError(f"class index must be in 0..3, got {index}")
        return CLASS_LABELS[index]

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        """Parse ``"1,0"``, ``"(1,0)"`` or ``"10"``."""
        digits = [ch for ch in text if ch in "01"]
        if len(digits) != 2:
            raise PreconditionError(f"cannot parse class label {text!r}")
        return cls(int(digits[0]), int(digits[1]))

    def __xor__(self, other: "ClassLabel") -> "ClassLabel":
        return ClassLabel(self.w1 ^ other.w1, self.w2 ^ other.w2)

    def __str__(self) -> str:
        return f"{self.w1},{self.w2}"

    @property
    def is_trivial(self) -> bool:
        return self.w1 == 0 and self.w2 == 0


CLASS_LABELS: Tuple[ClassLabel, ...] = tuple(
    ClassLabel(i & 1, i >> 1) for i in range(4)
)
TRIVIAL = CLASS_LABELS[0]


@dataclass(frozen=True)
class LatticeGeometry:
    """Index conventions and incidence data for the L x L torus."""

    L: int

    def __post_init__(self) -> None:
        if not isinstance(self.L, int) or self.L < 2:
            raise PreconditionError(f"lattice size must be an integer >= 2, got {self.L!r}")

    @property
    def num_edges(self) -> int:
        return 2 * self.L * self.L

    @property
    def num_vertices(self) -> int:
        return self.L * self.L

    @property
    def num_faces(self) -> int:
        return self.L * self.L

    def h(self, r: int, c: int) -> int:
        L = self.L
        return (r % L) * L + (c % L)

    def v(self, r: int, c: int) -> int:
        L = self.L
        return L * L + (r % L) * L + (c % L)

    def vertex(self, r: int, c: int) -> int:
        L = self.L
        return (r % L) * L + (c % L)

    def vertex_coords(self, index: int) -> Tuple[int, int]:
        return divmod(index, self.L)

    def edge_endpoints(self, edge: int) -> Tuple[int, int]:
        L = self.L
        if not 0 <= edge < self.num_edges:
            raise PreconditionError(f"edge {edge} out of range")
        if edge < L * L:
            r, c = divmod(edge, L)
            return self.vertex(r, c), self.vertex(r, c + 1)
        r, c = divmod(edge - L * L, L)
        return self.vertex(r, c), self.vertex(r + 1, c)

    @cached_property
    def endpoint_masks(self) -> Tuple[int, ...]:
        """Per edge, the syndrome bits of its two endpoints."""
        masks = []
        for e in range(self.num_edges):
            a, b = self.edge_endpoints(e)
            masks.append((1 << a) ^ (1 << b))
        return tuple(masks)

    @cached_property
    def face_masks(self) -> Tuple[int, ...]:
        L = self.L
        masks = []
        for f in range(self.num_faces):
            r, c = divmod(f, L)
            edges = (self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1))
            mask = 0
            for e in edges:
                mask |= 1 << e
            masks.append(mask)
        return tuple(masks)

    def empty_chain(self) -> Chain:
        return Chain(0, self.num_edges)

    def empty_syndrome(self) -> Syndrome:
        return Syndrome(0, self.num_vertices)

    def chain(self, edges: Iterable[int]) -> Chain:
        return Chain.from_indices(edges, self.num_edges)

    def syndrome(self, vertices: Iterable[int]) -> Syndrome:
        return Syndrome.from_indices(vertices, self.num_vertices)

    def syndrome_at(self, coords: Iterable[Tuple[int, int]]) -> Syndrome:
        return self.syndrome(self.vertex(r, c) for r, c in coords)

    def syndrome_from_hex(self, text: str) -> Syndrome:
        return Syndrome.from_hex(text, self.num_vertices)


def _iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def _check_chain(geometry: LatticeGeometry, chain: Chain) -> None:
    if not isinstance(chain, Chain):
        raise TypeError(f"expected Chain, got {type(chain).__name__}")
    if chain.length != geometry.num_edges:
        raise DimensionError(
            f"chain has length {chain.length}, lattice L={geometry.L} has "
            f"{geometry.num_edges} edges"
        )


def boundary(geometry: LatticeGeometry, chain: Chain) -> Syndrome:
    """Vertices incident to an odd number of chain edges."""
    _check_chain(geometry, chain)
    masks = geometry.endpoint_masks
    bits = 0
    for e in _iter_bits(chain.bits):
        bits ^= masks[e]
    return Syndrome(bits, geometry.num_vertices)


def face_boundary(geometry: LatticeGeometry, face_index: int) -> Chain:
    if not 0 <= face_index < geometry.num_faces:
        raise PreconditionError(
            f"face index {face_index} out of range 0..{geometry.num_faces - 1}"
        )
    return Chain(geometry.face_masks[face_index], geometry.num_edges)


def add(a: Chain, b: Chain) -> Chain:
    return a + b


def weight(chain: Chain) -> int:
    return chain.weight


def cut_parity(geometry: LatticeGeometry, chain: Chain) -> ClassLabel:
    """Parities of crossings of the column-0 and row-0 cuts.

    Every face boundary meets each cut in 0 or 2 edges, so the result depends
    only on the coset ``chain + B1``, cycle or not.
    """
    _check_chain(geometry, chain)
    L = geometry.L
    bits = chain.bits
    w1 = 0
    for r in range(L):
        w1 ^= (bits >> geometry.h(r, 0)) & 1
    w2 = 0
    for c in range(L):
        w2 ^= (bits >> geometry.v(0, c)) & 1
    return ClassLabel(w1, w2)


def homology_class(geometry: LatticeGeometry, cycle: Chain) -> ClassLabel:
    if boundary(geometry, cycle):
        raise PreconditionError("homology_class requires a cycle (empty boundary)")
    return cut_parity(geometry, cycle)


def _path_edges(geometry: LatticeGeometry, a: int, b: int) -> List[int]:
    """Row-first, then column path from vertex a to vertex b; ties go +."""
    L = geometry.L
    r1, c1 = geometry.vertex_coords(a)
    r2, c2 = geometry.vertex_coords(b)
    edges = []
    dc = (c2 - c1) % L
    if dc <= L - dc:
        edges.extend(geometry.h(r1, c1 + k) for k in range(dc))
    else:
        edges.extend(geometry.h(r1, c1 - k - 1) for k in range(L - dc))
    dr = (r2 - r1) % L
    if dr <= L - dr:
        edges.extend(geometry.v(r1 + k, c2) for k in range(dr))
    else:
        edges.extend(geometry.v(r1 - k - 1, c2) for k in range(L - dr))
    return edges


def canonical_representative(geometry: LatticeGeometry, syndrome: Syndrome) -> Chain:
    """A deterministic chain whose boundary is ``syndrome``.

    Defects are taken in row-major order and paired consecutively; each pair
    is joined by the shortest row-then-column path.
    """
    if syndrome.length != geometry.num_vertices:
        raise DimensionError(
            f"syndrome has length {syndrome.length}, expected {geometry.num_vertices}"
        )
    defects = syndrome.support()
    if len(defects) % 2:
        raise InvalidSyndromeError(f"syndrome {syndrome.hex()} has odd weight")
    bits = 0
    for a, b in zip(defects[0::2], defects[1::2]):
        for e in _path_edges(geometry, a, b):
            bits ^= 1 << e
    return Chain(bits, geometry.num_edges)


def logical_representative(geometry: LatticeGeometry, label: ClassLabel) -> Chain:
    """Row-0 horizontal loop for w1, column-0 vertical loop for w2."""
    L = geometry.L
    bits = 0
    if label.w1:
        for c in range(L):
            bits ^= 1 << geometry.h(0, c)
    if label.w2:
        for r in range(L):
            bits ^= 1 << geometry.v(r, 0)
    return Chain(bits, geometry.num_edges)


def relative_class(geometry: LatticeGeometry, chain: Chain) -> ClassLabel:
    """Class of ``chain`` relative to the canonical representative of its syndrome."""
    rep = canonical_representative(geometry, boundary(geometry, chain))
    return homology_class(geometry, chain + rep)


def boundary_generators(geometry: LatticeGeometry) -> List[Chain]:
    """The first F-1 face boundaries: a basis of B1 (the last face is dependent)."""
    return [face_boundary(geometry, f) for f in range(geometry.num_faces - 1)]


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of int-encoded row vectors."""
    basis: List[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
    return len(basis)


def boundary_matrix_rank(geometry: LatticeGeometry) -> int:
    """Rank of d1 over GF(2), from its edge columns."""
    return gf2_rank(geometry.endpoint_masks)


def cycle_space_dimension(geometry: LatticeGeometry) -> int:
    return geometry.num_edges - boundary_matrix_rank(geometry)


def boundary_space_dimension(geometry: LatticeGeometry) -> int:
    return gf2_rank(geometry.face_masks)
