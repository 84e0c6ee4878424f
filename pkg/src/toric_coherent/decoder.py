"""Maximum-likelihood decoding and coherent versus twirled success probabilities.

For a syndrome with class sums ``Z_K`` (coherent) and ``D_K`` (Pauli
twirled), the decoder picks ``K* = argmax Z_K`` and

    success   = Z_K* / sum Z
    twirled   = D_K* / sum D

Both are evaluated with the ``x^(2 l_min)`` factor divided out wherever a
ratio allows it, so small angles do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from toric_coherent.chain_complex import CLASS_LABELS, ClassLabel, LatticeGeometry, Syndrome
from toric_coherent.channel import Angle, as_angle
from toric_coherent.enumerator import (
    DEFAULT_BUDGET,
    SyndromeTable,
    all_syndrome_tables,
    poly_D,
    signed_enumerator,
    syndrome_table,
)
from toric_coherent.errors import (
    NumericalAssumptionError,
    PreconditionError,
    UndefinedConditionalError,
)

RATIO_CONSISTENCY = 1e-10


def _class_sums(table: SyndromeTable, x: float) -> Tuple[List[float], List[float]]:
    z = [signed_enumerator(e).evaluate(x) ** 2 for e in table]
    d = [poly_D(e).evaluate(x) for e in table]
    return z, d


def _argmax(values: Sequence[float]) -> int:
    # ties go to the smallest label index
    return max(range(len(values)), key=lambda i: (values[i], -i))


def ml_class(table: SyndromeTable, theta: Angle) -> ClassLabel:
    z, _ = _class_sums(table, as_angle(theta).x)
    if not any(z):
        raise UndefinedConditionalError(
            f"syndrome {table.syndrome.hex()} is impossible at theta={as_angle(theta).theta}"
        )
    return CLASS_LABELS[_argmax(z)]


def success_probability(table: SyndromeTable, theta: Angle) -> float:
    z, _ = _class_sums(table, as_angle(theta).x)
    k = ml_class(table, theta).index
    return z[k] / math.fsum(z)


def twirled_success_probability(table: SyndromeTable, theta: Angle) -> float:
    """Stochastic-model success of the class chosen by the coherent decoder."""
    _, d = _class_sums(table, as_angle(theta).x)
    k = ml_class(table, theta).index
    return d[k] / math.fsum(d)


def _ratio_factors(table: SyndromeTable, x: float) -> List[float]:
    """``R_K = Z_K / D_K`` with the common ``x^(2 l_min)`` cancelled."""
    y = x * x
    out = []
    for e in table:
        p = 0.0
        q = 0.0
        for n in reversed(range(len(e.degeneracies))):
            d = e.degeneracies[n]
            p = p * y + (d if n % 2 == 0 else -d)
        for d in reversed(e.degeneracies):
            q = q * y * y + d
        out.append(p * p / q)
    return out


def twirl_ratio(table: SyndromeTable, theta: Angle) -> float:
    """``Pr_twirl / Pr`` for the decoded class.

    Evaluated directly and through ``1 + sum_i (R_i/R_1 - 1) D_i / sum D``;
    the two must agree to ``RATIO_CONSISTENCY``.
    """
    angle = as_angle(theta)
    x = angle.x
    if x == 0:
        return 1.0
    k = ml_class(table, angle).index
    z, d = _class_sums(table, x)
    direct = (d[k] / math.fsum(d)) / (z[k] / math.fsum(z))
    r = _ratio_factors(table, x)
    d_total = math.fsum(d)
    rebuilt = 1.0 + math.fsum((r[i] / r[k] - 1.0) * d[i] / d_total for i in range(4) if i != k)
    if abs(direct - rebuilt) > RATIO_CONSISTENCY * max(1.0, abs(direct)):
        raise NumericalAssumptionError(
            f"twirl ratio mismatch for {table.syndrome.hex()}: {direct} vs {rebuilt}"
        )
    return direct


@dataclass(frozen=True)
class LeadingRatio:
    """Lowest-order ``Pr_twirl/Pr`` as ``sum_e terms[e] x^e`` with exact rational coefficients.

    ``reference`` is the class with the shortest chain (largest d0 on ties).
    ``tied`` lists other classes sharing its ``l_min``; when non-empty the
    leading term is not a reliable extrapolation.
    """

    reference: ClassLabel
    terms: Dict[int, Fraction]
    tied: Tuple[ClassLabel, ...] = ()

    @property
    def is_tie(self) -> bool:
        return bool(self.tied)

    def evaluate(self, x: float) -> float:
        return math.fsum(float(c) * x**e for e, c in self.terms.items())

    def __str__(self) -> str:
        parts = [f"{c}" if e == 0 else f"{c}*x^{e}" for e, c in sorted(self.terms.items())]
        return " + ".join(parts) if parts else "0"


def twirl_ratio_leading(table: SyndromeTable, order: Optional[int] = None) -> LeadingRatio:
    """``1 + sum_i rho_i (rho_i - 1) x^(2(l_i - l_1))`` with ``rho_i = d0_i / d0_1``.

    ``order`` drops terms above ``x^order``.
    """
    ref = table.minimal_label()
    e1 = table[ref]
    terms: Dict[int, Fraction] = {0: Fraction(1)}
    tied = []
    for k in CLASS_LABELS:
        if k == ref:
            continue
        ek = table[k]
        if ek.l_min == e1.l_min:
            tied.append(k)
        rho = Fraction(ek.d0, e1.d0)
        exp = 2 * (ek.l_min - e1.l_min)
        if order is not None and exp > order:
            continue
        terms[exp] = terms.get(exp, Fraction(0)) + rho * (rho - 1)
    return LeadingRatio(ref, terms, tuple(tied))


@dataclass
class DecodeOutcome:
    syndrome: str
    chosen: ClassLabel
    success: float
    twirled_success: float
    ratio: float
    coherent_conditionals: List[float]
    twirled_conditionals: List[float]


def decode(table: SyndromeTable, theta: Angle) -> DecodeOutcome:
    angle = as_angle(theta)
    z, d = _class_sums(table, angle.x)
    k = ml_class(table, angle)
    zc = [v / math.fsum(z) for v in z]
    dc = [v / math.fsum(d) for v in d]
    return DecodeOutcome(
        syndrome=table.syndrome.hex(),
        chosen=k,
        success=zc[k.index],
        twirled_success=dc[k.index],
        ratio=twirl_ratio(table, angle),
        coherent_conditionals=zc,
        twirled_conditionals=dc,
    )


# ---------------------------------------------------------------------------
# syndrome averages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AveragedSuccess:
    """``coherent = sum_S Pr(S) success(S)``; ``twirled`` is the same decoder under
    the twirled model, ``sum_S q(S) twirled(S)`` with ``q`` the stochastic
    syndrome distribution."""

    coherent: float
    twirled: float


def averaged_success_exact(
    geometry: LatticeGeometry,
    theta: Angle,
    *,
    tables: Optional[Sequence[SyndromeTable]] = None,
    budget: int = DEFAULT_BUDGET,
    allow_large: bool = False,
    cache=None,
) -> AveragedSuccess:
    angle = as_angle(theta)
    if tables is None:
        tables = [t for _, t in all_syndrome_tables(
            geometry, budget=budget, allow_large=allow_large, cache=cache)]
    scale = angle.cos_power(2 * geometry.num_edges)
    coherent, twirled = [], []
    for table in tables:
        z, d = _class_sums(table, angle.x)
        if not any(z):
            continue
        k = _argmax(z)
        coherent.append(scale * z[k])
        twirled.append(scale * d[k])
    return AveragedSuccess(math.fsum(coherent), math.fsum(twirled))


@dataclass(frozen=True)
class SampledAverage:
    """Importance-sampled syndrome average; ``stderr`` is ``std(ddof=1)/sqrt(count)``."""

    estimate: float
    stderr: float
    count: int
    seed: int
    generator: str = "numpy.random.Philox (Philox4x64-10)"


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox4x64-10 stream; portable and reproducible from ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


def sample_syndromes(geometry: LatticeGeometry, theta: Angle, samples: int, seed: int) -> List[int]:
    """Boundaries of chains with i.i.d. edge flips at ``p = sin^2 theta``, as syndrome ints."""
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    angle = as_angle(theta)
    p = angle.sin**2
    rng = make_rng(seed)
    flips = rng.random((samples, geometry.num_edges)) < p
    incidence = np.zeros((geometry.num_edges, geometry.num_vertices), dtype=np.int64)
    for e in range(geometry.num_edges):
        a, b = geometry.edge_endpoints(e)
        incidence[e, a] = 1
        incidence[e, b] = 1
    defects = (flips.astype(np.int64) @ incidence) & 1
    weights = np.array([1 << v for v in range(geometry.num_vertices)], dtype=object)
    return [int(x) for x in defects.astype(object) @ weights]


def averaged_success_sampled(
    geometry: LatticeGeometry,
    theta: Angle,
    samples: int,
    seed: int,
    *,
    quantity: str = "coherent",
    budget: int = DEFAULT_BUDGET,
    cache=None,
) -> SampledAverage:
    """Estimate the averaged success probability from twirled-model samples.

    Syndromes are drawn from the stochastic model ``q(S)``; each sample
    carries the weight ``Pr(S)/q(S) = sum Z / sum D`` when ``quantity`` is
    ``"coherent"``.  ``"twirled"`` estimates the twirled average (weight 1).
    """
    if quantity not in ("coherent", "twirled"):
        raise PreconditionError(f"unknown quantity {quantity!r}")
    angle = as_angle(theta)
    drawn = sample_syndromes(geometry, angle, samples, seed)
    per_syndrome: Dict[int, float] = {}
    for bits in sorted(set(drawn)):
        table = syndrome_table(
            geometry, Syndrome(bits, geometry.num_vertices), budget=budget, cache=cache
        )
        z, d = _class_sums(table, angle.x)
        if quantity == "coherent":
            k = _argmax(z)
            per_syndrome[bits] = z[k] / math.fsum(d)
        else:
            k = _argmax(z)
            per_syndrome[bits] = d[k] / math.fsum(d)
    values = np.array([per_syndrome[b] for b in drawn], dtype=np.float64)
    estimate = math.fsum(values) / len(values)
    stderr = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return SampledAverage(estimate, stderr, len(values), seed)
