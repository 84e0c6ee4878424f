"""Exact weight enumerators of syndrome cosets and their polynomials.

For a syndrome ``S`` and class label ``K`` the coset is
``E0 + logical(K) + B1`` with ``E0`` the canonical representative of ``S``;
labels are therefore relative to the canonical representative.  The
enumerator records how many coset members have each weight.

From the enumerator, with ``x = tan(theta)``:

* ``D`` is the stochastic (twirled) sum ``sum_c x^(2|c|)``,
* ``Z`` is the coherent sum ``sum_{c,c'} (-1)^((|c|+3|c'|)/2) x^(|c|+|c'|)``,
* ``O = Z - D`` is the cross-chain (coherent) part.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, List, Optional, Sequence, Tuple

from toric_coherent import _gray
from toric_coherent.chain_complex import (
    CLASS_LABELS,
    Chain,
    ClassLabel,
    LatticeGeometry,
    Syndrome,
    boundary,
    canonical_representative,
    cut_parity,
    logical_representative,
)
from toric_coherent.errors import (
    BudgetExceededError,
    InvalidSyndromeError,
    PreconditionError,
    ToricError,
)

if TYPE_CHECKING:
    from toric_coherent.cache import EnumeratorCache

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 2**26
AUDIT_EVERY = 2**10


@dataclass(frozen=True)
class WeightEnumerator:
    """Degeneracy spectrum of one class: ``degeneracies[n]`` chains of weight ``l_min + 2n``."""

    l_min: int
    degeneracies: Tuple[int, ...]
    L: Optional[int] = None
    syndrome: Optional[str] = None
    label: Optional[ClassLabel] = None

    def __post_init__(self) -> None:
        degs = tuple(int(d) for d in self.degeneracies)
        object.__setattr__(self, "degeneracies", degs)
        if self.l_min < 0:
            raise PreconditionError(f"l_min must be >= 0, got {self.l_min}")
        if not degs or degs[0] < 1:
            raise PreconditionError("d0 must be at least 1")
        if any(d < 0 for d in degs):
            raise PreconditionError("degeneracies must be non-negative")

    @classmethod
    def from_histogram(
        cls,
        histogram: Sequence[int],
        L: Optional[int] = None,
        syndrome: Optional[str] = None,
        label: Optional[ClassLabel] = None,
    ) -> "WeightEnumerator":
        """Build from ``histogram[w]`` = number of chains of weight ``w``."""
        nonzero = [w for w, count in enumerate(histogram) if count]
        if not nonzero:
            raise ToricError("empty weight histogram")
        l_min, top = nonzero[0], nonzero[-1]
        if any((w - l_min) % 2 for w in nonzero):
            raise ToricError("coset weights do not share a parity")
        degs = tuple(int(histogram[w]) for w in range(l_min, top + 1, 2))
        return cls(l_min, degs, L=L, syndrome=syndrome, label=label)

    @property
    def total(self) -> int:
        return sum(self.degeneracies)

    @property
    def d0(self) -> int:
        return self.degeneracies[0]

    def degeneracy(self, n: int) -> int:
        return self.degeneracies[n] if 0 <= n < len(self.degeneracies) else 0

    @property
    def num_edges(self) -> int:
        if self.L is None:
            raise PreconditionError("enumerator carries no lattice size")
        return 2 * self.L * self.L

    def histogram(self) -> dict:
        return {self.l_min + 2 * n: d for n, d in enumerate(self.degeneracies) if d}


@dataclass(frozen=True)
class SyndromeTable:
    """The four class enumerators of one syndrome, indexed by ``ClassLabel.index``."""

    L: int
    syndrome: Syndrome
    enumerators: Tuple[WeightEnumerator, ...]

    def __post_init__(self) -> None:
        if len(self.enumerators) != 4:
            raise PreconditionError("a syndrome table holds exactly four enumerators")

    def __getitem__(self, label: ClassLabel) -> WeightEnumerator:
        return self.enumerators[label.index]

    def __iter__(self) -> Iterator[WeightEnumerator]:
        return iter(self.enumerators)

    @property
    def geometry(self) -> LatticeGeometry:
        return LatticeGeometry(self.L)

    @property
    def total(self) -> int:
        return sum(e.total for e in self.enumerators)

    def minimal_label(self) -> ClassLabel:
        """Class with the shortest chain; ties go to the larger d0, then the smaller label."""
        best = min(CLASS_LABELS, key=lambda k: (self[k].l_min, -self[k].d0, k.index))
        return best


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignedPolynomial:
    """Exact integer polynomial ``sum_k coeffs[k] * x^(low + 2k)``.

    Stored in canonical form: no leading or trailing zero coefficients, and
    the zero polynomial is ``low=0, coeffs=()``.
    """

    low: int
    coeffs: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        coeffs = [int(c) for c in self.coeffs]
        low = self.low
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        lead = 0
        while lead < len(coeffs) and coeffs[lead] == 0:
            lead += 1
        coeffs = coeffs[lead:]
        low += 2 * lead
        if not coeffs:
            low = 0
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "low", low)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def high(self) -> int:
        return self.low + 2 * (len(self.coeffs) - 1) if self.coeffs else 0

    def coefficient(self, exponent: int) -> int:
        k, rem = divmod(exponent - self.low, 2)
        if rem or k < 0 or k >= len(self.coeffs):
            return 0
        return self.coeffs[k]

    def terms(self) -> List[Tuple[int, int]]:
        return [(self.low + 2 * k, c) for k, c in enumerate(self.coeffs) if c]

    def _aligned(self, other: "SignedPolynomial") -> Tuple[int, List[int], List[int]]:
        if self.is_zero or other.is_zero:
            low = other.low if self.is_zero else self.low
        else:
            if (self.low - other.low) % 2:
                raise ValueError("cannot combine polynomials of mixed exponent parity")
            low = min(self.low, other.low)
        high = max(self.high if not self.is_zero else low, other.high if not other.is_zero else low)
        size = (high - low) // 2 + 1
        a = [self.coefficient(low + 2 * k) for k in range(size)]
        b = [other.coefficient(low + 2 * k) for k in range(size)]
        return low, a, b

    def __add__(self, other: "SignedPolynomial") -> "SignedPolynomial":
        low, a, b = self._aligned(other)
        return SignedPolynomial(low, tuple(p + q for p, q in zip(a, b)))

    def __neg__(self) -> "SignedPolynomial":
        return SignedPolynomial(self.low, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "SignedPolynomial") -> "SignedPolynomial":
        return self + (-other)

    def __mul__(self, other: "SignedPolynomial") -> "SignedPolynomial":
        if self.is_zero or other.is_zero:
            return SignedPolynomial(0, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return SignedPolynomial(self.low + other.low, tuple(out))

    def evaluate(self, x):
        """Horner in ``x**2``; works for float, complex, Fraction or mpmath values."""
        if self.is_zero:
            return 0 * x
        y = x * x
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc * x**self.low

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for exp, c in self.terms():
            mono = "" if exp == 0 else ("x" if exp == 1 else f"x^{exp}")
            mag = abs(c)
            body = (str(mag) if mag != 1 or not mono else "") + mono
            parts.append(("-" if c < 0 else "+") + body)
        text = " ".join(parts)
        return text[1:] if text.startswith("+") else text


def signed_enumerator(enumerator: WeightEnumerator) -> SignedPolynomial:
    """``sum_n d_n (-1)^n x^(l_min + 2n)``; the class amplitude up to phase and cos factor."""
    return SignedPolynomial(
        enumerator.l_min,
        tuple(d if n % 2 == 0 else -d for n, d in enumerate(enumerator.degeneracies)),
    )


def poly_D(enumerator: WeightEnumerator) -> SignedPolynomial:
    """``sum_n d_n x^(2 l_min + 4n)``."""
    coeffs: List[int] = []
    for d in enumerator.degeneracies:
        coeffs.extend((d, 0))
    return SignedPolynomial(2 * enumerator.l_min, tuple(coeffs))


def _z_coefficients(degs: Sequence[int]) -> List[int]:
    n = len(degs)
    z = [0] * (2 * n - 1)
    for i in range(n):
        for j in range(n):
            z[i + j] += degs[i] * degs[j]
    return z


def poly_Z(enumerator: WeightEnumerator) -> SignedPolynomial:
    """``sum_m z_m (-1)^m x^(2 l_min + 2m)`` with ``z_m = sum_{n+n'=m} d_n d_n'``."""
    z = _z_coefficients(enumerator.degeneracies)
    return SignedPolynomial(
        2 * enumerator.l_min, tuple(zm if m % 2 == 0 else -zm for m, zm in enumerate(z))
    )


def poly_O(enumerator: WeightEnumerator) -> SignedPolynomial:
    """Cross-chain part: ``o_m = z_m - d_(m/2)`` for even ``m``, ``z_m`` for odd ``m``."""
    degs = enumerator.degeneracies
    z = _z_coefficients(degs)
    coeffs = []
    for m, zm in enumerate(z):
        om = zm - degs[m // 2] if m % 2 == 0 and m // 2 < len(degs) else zm
        coeffs.append(om if m % 2 == 0 else -om)
    return SignedPolynomial(2 * enumerator.l_min, tuple(coeffs))


def ratio_series(enumerator: WeightEnumerator, order: int) -> List[Fraction]:
    """Coefficients ``r_0..r_order`` of ``O/D = sum_m r_m x^(2m)`` as exact rationals."""
    if order < 0:
        raise PreconditionError(f"order must be >= 0, got {order}")
    base = 2 * enumerator.l_min
    num = [Fraction(poly_O(enumerator).coefficient(base + 2 * m)) for m in range(order + 1)]
    den = [Fraction(poly_D(enumerator).coefficient(base + 2 * m)) for m in range(order + 1)]
    r: List[Fraction] = []
    for m in range(order + 1):
        acc = num[m] - sum(r[k] * den[m - k] for k in range(m))
        r.append(acc / den[0])
    return r


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def coset_size(geometry: LatticeGeometry) -> int:
    return 2 ** (geometry.num_faces - 1)


def _check_budget(geometry: LatticeGeometry, budget: int) -> None:
    size = coset_size(geometry)
    if size > budget:
        raise BudgetExceededError(
            f"L={geometry.L} needs 2^{geometry.num_faces - 1} boundary-group elements "
            f"per class, above the budget of {budget}"
        )


def _check_syndrome(geometry: LatticeGeometry, syndrome: Syndrome) -> None:
    if syndrome.length != geometry.num_vertices:
        raise PreconditionError(
            f"syndrome has length {syndrome.length}, expected {geometry.num_vertices}"
        )
    if syndrome.weight % 2:
        raise InvalidSyndromeError(f"syndrome {syndrome.hex()} has odd weight")


def _class_starts(
    geometry: LatticeGeometry,
    syndrome: Syndrome,
    labels: Sequence[ClassLabel],
    representative: Optional[Chain],
) -> List[int]:
    canonical = canonical_representative(geometry, syndrome)
    if representative is None:
        rep, offset = canonical, CLASS_LABELS[0]
    else:
        if boundary(geometry, representative) != syndrome:
            raise PreconditionError("representative does not have the requested boundary")
        rep = representative
        offset = cut_parity(geometry, rep) ^ cut_parity(geometry, canonical)
    return [(rep + logical_representative(geometry, k ^ offset)).bits for k in labels]


def _enumerate(
    geometry: LatticeGeometry,
    syndrome: Syndrome,
    labels: Sequence[ClassLabel],
    budget: int,
    representative: Optional[Chain] = None,
    audit: bool = True,
) -> List[WeightEnumerator]:
    _check_syndrome(geometry, syndrome)
    _check_budget(geometry, budget)
    starts = _class_starts(geometry, syndrome, labels, representative)
    faces = geometry.face_masks[: geometry.num_faces - 1]
    hist, mismatches = _gray.gray_histograms(
        starts, faces, geometry.num_edges, AUDIT_EVERY if audit else 0
    )
    if mismatches:
        raise ToricError(f"incremental weight audit failed {mismatches} times")
    hex_s = syndrome.hex()
    return [
        WeightEnumerator.from_histogram(hist[i].tolist(), L=geometry.L, syndrome=hex_s, label=k)
        for i, k in enumerate(labels)
    ]


def class_weight_enumerator(
    geometry: LatticeGeometry,
    syndrome: Syndrome,
    label: ClassLabel,
    *,
    budget: int = DEFAULT_BUDGET,
    representative: Optional[Chain] = None,
    audit: bool = True,
) -> WeightEnumerator:
    """Weight enumerator of one class of the fiber over ``syndrome``.

    ``representative`` may be any chain with boundary ``syndrome``; labels are
    still read relative to the canonical representative, so the result does
    not depend on it.
    """
    return _enumerate(geometry, syndrome, [label], budget, representative, audit)[0]


def syndrome_table(
    geometry: LatticeGeometry,
    syndrome: Syndrome,
    *,
    budget: int = DEFAULT_BUDGET,
    cache: Optional["EnumeratorCache"] = None,
) -> SyndromeTable:
    """All four class enumerators of ``syndrome``, read through ``cache`` if given."""
    _check_syndrome(geometry, syndrome)
    if cache is not None:
        cached = cache.get_table(geometry, syndrome)
        if cached is not None:
            return cached
    enums = _enumerate(geometry, syndrome, CLASS_LABELS, budget)
    table = SyndromeTable(geometry.L, syndrome, tuple(enums))
    if cache is not None:
        cache.put_table(table)
    return table


def even_syndromes(geometry: LatticeGeometry) -> Iterator[Syndrome]:
    """Every even-weight syndrome once: counter ``k`` on the low V-1 bits, top bit = parity."""
    nv = geometry.num_vertices
    top = nv - 1
    for k in range(2 ** top):
        parity = bin(k).count("1") & 1
        yield Syndrome(k | (parity << top), nv)


def all_syndrome_tables(
    geometry: LatticeGeometry,
    *,
    budget: int = DEFAULT_BUDGET,
    allow_large: bool = False,
    cache: Optional["EnumeratorCache"] = None,
) -> Iterator[Tuple[Syndrome, SyndromeTable]]:
    """Tables for every syndrome, in ``even_syndromes`` order.

    L <= 3 runs by default.  L = 4 (2^15 syndromes of 2^15-element cosets)
    needs ``allow_large=True``; anything larger is refused.
    """
    if geometry.L >= 5:
        raise BudgetExceededError(f"a full syndrome sweep at L={geometry.L} is infeasible")
    if geometry.L == 4:
        if not allow_large:
            raise BudgetExceededError("full sweep at L=4 requires allow_large=True")
        warnings.warn(
            "full L=4 sweep: 2^15 syndromes x 4 x 2^15 steps; expect minutes of CPU",
            stacklevel=2,
        )
    _check_budget(geometry, budget)
    for s in even_syndromes(geometry):
        yield s, syndrome_table(geometry, s, budget=budget, cache=cache)
