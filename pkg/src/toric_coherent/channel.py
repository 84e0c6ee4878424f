"""Theta-dependent quantities of the coherent X-rotation channel.

Each qubit suffers ``exp(i theta X)``.  A class amplitude is

    A_K(S) = i^l_min * cos(theta)^E * sum_n d_n (-1)^n x^(l_min + 2n),   x = tan(theta)

so every quantity below is assembled from the four class enumerators of a
syndrome.  The common ``cos(theta)^(2E)`` factor is applied in log space and
cancels entirely from conditional quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import mpmath

from toric_coherent.chain_complex import CLASS_LABELS, Chain, ClassLabel
from toric_coherent.enumerator import SyndromeTable, WeightEnumerator, signed_enumerator
from toric_coherent.errors import (
    NumericalAssumptionError,
    PreconditionError,
    UndefinedConditionalError,
)

CLAMP_TOLERANCE = 1e-12
POSITIVITY_TOLERANCE = 1e-12
PRECISE_DPS = 50

_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


@dataclass(frozen=True)
class RotationAngle:
    theta: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not math.isfinite(theta) or abs(theta) >= math.pi / 2:
            raise PreconditionError(f"rotation angle must lie in (-pi/2, pi/2), got {self.theta}")
        object.__setattr__(self, "theta", theta)

    @property
    def x(self) -> float:
        return math.tan(self.theta)

    @property
    def cos(self) -> float:
        return math.cos(self.theta)

    @property
    def sin(self) -> float:
        return math.sin(self.theta)

    def cos_power(self, power: int) -> float:
        """``cos(theta)**power`` through ``exp(power * log cos)``."""
        if power == 0:
            return 1.0
        return math.exp(power * math.log(self.cos))


Angle = Union[float, RotationAngle]


def as_angle(theta: Angle) -> RotationAngle:
    return theta if isinstance(theta, RotationAngle) else RotationAngle(theta)


def average_infidelity(theta: Angle) -> float:
    """Average single-qubit infidelity ``(1 - cos 2theta) / 3``."""
    t = as_angle(theta).theta
    return (1.0 - math.cos(2.0 * t)) / 3.0


def chain_amplitude(chain: Chain, theta: Angle) -> complex:
    """``(i sin theta)^|E| (cos theta)^(E - |E|)``."""
    angle = as_angle(theta)
    w = chain.weight
    return _I_POWERS[w % 4] * (angle.sin**w) * (angle.cos ** (chain.length - w))


@dataclass(frozen=True)
class ClassAmplitude:
    """``i**phase * real``: a phase from the minimum weight times a real number."""

    phase: int
    real: float

    @property
    def value(self) -> complex:
        return _I_POWERS[self.phase % 4] * self.real

    def __abs__(self) -> float:
        return abs(self.real)

    def __complex__(self) -> complex:
        return self.value


def _signed_value(enum: WeightEnumerator, x: float, precise: bool):
    poly = signed_enumerator(enum)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            return poly.evaluate(mpmath.mpf(x))
    return poly.evaluate(x)


def class_amplitude(enum: WeightEnumerator, theta: Angle, precise: bool = False) -> ClassAmplitude:
    angle = as_angle(theta)
    s = float(_signed_value(enum, angle.x, precise))
    return ClassAmplitude(enum.l_min % 4, angle.cos_power(enum.num_edges) * s)


class _TableTerms:
    """Per-class signed sums ``s_K = x^l sum_n d_n (-1)^n x^(2n)`` of a syndrome.

    ``A_K = i^l_K cos^E s_K``; nothing here carries the cos factor.
    """

    def __init__(self, table: SyndromeTable, theta: Angle, precise: bool = False) -> None:
        self.table = table
        self.angle = as_angle(theta)
        self.precise = precise
        x = self.angle.x
        self.s = [_signed_value(e, x, precise) for e in table.enumerators]
        self.phase = [e.l_min % 4 for e in table.enumerators]
        self.z = [v * v for v in self.s]
        self.z_total = _sum(self.z, precise)

    def cos_factor(self) -> float:
        return self.angle.cos_power(2 * 2 * self.table.L * self.table.L)

    def require_nonzero(self) -> None:
        if self.z_total == 0:
            raise UndefinedConditionalError(
                f"syndrome {self.table.syndrome.hex()} has zero probability at "
                f"theta={self.angle.theta}"
            )

    def product(self, a: int, b: int):
        """``A_a conj(A_b)`` without the cos factor."""
        return _I_POWERS[(self.phase[a] - self.phase[b]) % 4] * (self.s[a] * self.s[b])

    def nbar(self, left: ClassLabel, right: ClassLabel) -> complex:
        self.require_nonzero()
        acc = _sum((self.product((j ^ left).index, (j ^ right).index) for j in CLASS_LABELS), self.precise)
        return complex(acc / self.z_total)


def _sum(values: Iterable, precise: bool):
    values = list(values)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            return mpmath.fsum(values)
    if values and isinstance(values[0], complex):
        return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
    return math.fsum(values)


def syndrome_probability(table: SyndromeTable, theta: Angle, precise: bool = False) -> float:
    """``Pr(S) = sum_K |A_K|^2``; cross-class terms vanish on the logical |0,0> state."""
    terms = _TableTerms(table, theta, precise)
    return terms.cos_factor() * float(terms.z_total)


def conditional_class_probability(
    table: SyndromeTable, label: ClassLabel, theta: Angle, precise: bool = False
) -> float:
    """``Pr([K] | S) = Z_K / sum_J Z_J``."""
    terms = _TableTerms(table, theta, precise)
    terms.require_nonzero()
    return float(terms.z[label.index] / terms.z_total)


def conditional_probabilities(table: SyndromeTable, theta: Angle, precise: bool = False) -> List[float]:
    terms = _TableTerms(table, theta, precise)
    terms.require_nonzero()
    return [float(z / terms.z_total) for z in terms.z]


def joint_probability(
    table: SyndromeTable, label: ClassLabel, theta: Angle, precise: bool = False
) -> float:
    """``Pr([K], S) = cos^(2E) Z_K``."""
    terms = _TableTerms(table, theta, precise)
    return terms.cos_factor() * float(terms.z[label.index])


def nbar(
    table: SyndromeTable, left: ClassLabel, right: ClassLabel, theta: Angle, precise: bool = False
) -> complex:
    """Syndrome-conditioned logical coefficient ``sum_J A_(J+L) conj(A_(J+L')) / Pr(S)``."""
    return _TableTerms(table, theta, precise).nbar(left, right)


def kl_matrices(
    table: SyndromeTable, theta: Angle, precise: bool = False
) -> Tuple[float, Dict[ClassLabel, complex]]:
    """Diagonal block of the generalized Knill-Laflamme matrices for one syndrome.

    Returns ``lambda_S = Pr(S) Nbar_00`` and the coefficients of ``X_L``
    (``L`` nontrivial) in ``B_S``, ``Pr(S) Nbar_0L``.  Blocks between distinct
    syndromes vanish identically and are not represented.
    """
    terms = _TableTerms(table, theta, precise)
    pr = terms.cos_factor() * float(terms.z_total)
    if terms.z_total == 0:
        return 0.0, {k: 0j for k in CLASS_LABELS[1:]}
    lam = pr * terms.nbar(CLASS_LABELS[0], CLASS_LABELS[0]).real
    b = {k: pr * terms.nbar(CLASS_LABELS[0], k) for k in CLASS_LABELS[1:]}
    return lam, b


def _real_positive(value: complex, what: str, syndrome: str) -> float:
    scale = max(1.0, abs(value))
    if abs(value.imag) > POSITIVITY_TOLERANCE * scale or value.real < -POSITIVITY_TOLERANCE:
        raise NumericalAssumptionError(f"{what} for syndrome {syndrome} is not real positive: {value}")
    return max(value.real, 0.0)


def delta_lb(tables: Iterable[SyndromeTable], theta: Angle, precise: bool = False) -> float:
    """Lower bound on the Bures distance between the logical channels.

    Uses the closed form for the pure logical state ``|S=0, ++>``:

        sqrt(1 - sum_S Pr √(T_S G_S) / (√(sum_S Pr T_S) √(sum_S Pr G_S)))

    with ``G_S = Nbar_00`` and ``T_S = sum_L Nbar_0L``.
    """
    weighted_root, weighted_t, weighted_g = [], [], []
    for table in tables:
        terms = _TableTerms(table, theta, precise)
        if terms.z_total == 0:
            continue
        pr = terms.cos_factor() * float(terms.z_total)
        hex_s = table.syndrome.hex()
        g = _real_positive(terms.nbar(CLASS_LABELS[0], CLASS_LABELS[0]), "Nbar_00", hex_s)
        t_sum = sum(terms.nbar(CLASS_LABELS[0], k) for k in CLASS_LABELS)
        t = _real_positive(t_sum, "sum_L Nbar_0L", hex_s)
        weighted_root.append(pr * math.sqrt(t * g))
        weighted_t.append(pr * t)
        weighted_g.append(pr * g)
    denom = math.sqrt(math.fsum(weighted_t)) * math.sqrt(math.fsum(weighted_g))
    if denom == 0:
        raise NumericalAssumptionError("delta_lb normalisation vanished")
    radicand = 1.0 - math.fsum(weighted_root) / denom
    if radicand < 0:
        if radicand < -CLAMP_TOLERANCE:
            raise NumericalAssumptionError(f"delta_lb radicand {radicand} is negative")
        radicand = 0.0
    return math.sqrt(radicand)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class SyndromeChannelRow:
    syndrome: str
    probability: float
    conditionals: List[float]
    nbar: Dict[ClassLabel, complex]
    lam: float
    b: Dict[ClassLabel, complex]


@dataclass
class ChannelReport:
    theta: float
    x: float
    L: int
    rows: List[SyndromeChannelRow] = field(default_factory=list)
    total_probability: float = math.nan
    total_lambda: float = math.nan
    delta_lb: float = math.nan
    infidelity: float = math.nan
    averaged_nbar: Dict[ClassLabel, complex] = field(default_factory=dict)
    averaged_abs_nbar: Dict[ClassLabel, float] = field(default_factory=dict)
    complete: bool = False

    def check(self, tolerance: float = 1e-10) -> None:
        for row in self.rows:
            if not 0.0 <= row.probability <= 1.0 + tolerance:
                raise NumericalAssumptionError(f"Pr(S) out of range for {row.syndrome}")
            if row.probability > 0 and abs(math.fsum(row.conditionals) - 1.0) > tolerance:
                raise NumericalAssumptionError(f"conditionals of {row.syndrome} do not sum to 1")


def channel_report(
    tables: Sequence[SyndromeTable], theta: Angle, complete: bool = True, precise: bool = False
) -> ChannelReport:
    """Per-syndrome channel quantities plus syndrome averages.

    ``complete`` declares that ``tables`` covers every syndrome; only then
    are the averaged quantities and ``delta_lb`` filled in.
    """
    angle = as_angle(theta)
    if not tables:
        raise PreconditionError("channel_report needs at least one syndrome table")
    report = ChannelReport(theta=angle.theta, x=angle.x, L=tables[0].L, complete=complete)
    report.infidelity = average_infidelity(angle)
    nan = float("nan")
    for table in tables:
        terms = _TableTerms(table, angle, precise)
        pr = terms.cos_factor() * float(terms.z_total)
        if terms.z_total == 0:
            conds = [nan] * 4
            nb = {k: complex(nan, nan) for k in CLASS_LABELS}
            lam, b = 0.0, {k: 0j for k in CLASS_LABELS[1:]}
        else:
            conds = [float(z / terms.z_total) for z in terms.z]
            nb = {k: terms.nbar(CLASS_LABELS[0], k) for k in CLASS_LABELS}
            lam = pr * nb[CLASS_LABELS[0]].real
            b = {k: pr * nb[k] for k in CLASS_LABELS[1:]}
        report.rows.append(SyndromeChannelRow(table.syndrome.hex(), pr, conds, nb, lam, b))
    if complete:
        live = [r for r in report.rows if r.probability > 0]
        report.total_probability = math.fsum(r.probability for r in report.rows)
        report.total_lambda = math.fsum(r.lam for r in live)
        for k in CLASS_LABELS:
            report.averaged_nbar[k] = complex(
                math.fsum(r.probability * r.nbar[k].real for r in live),
                math.fsum(r.probability * r.nbar[k].imag for r in live),
            )
            report.averaged_abs_nbar[k] = math.fsum(r.probability * abs(r.nbar[k]) for r in live)
        report.delta_lb = delta_lb(tables, angle, precise)
    return report
