"""Brute-force ground truth by direct summation over every error chain.

Nothing here touches the enumerator: each of the ``2^E`` chains gets its
weight, boundary and class recomputed from scratch, and amplitudes are
accumulated per ``(syndrome, class)``.  Only the lattice primitives
(endpoint masks, cut edges, canonical representatives) are shared with the
fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from toric_coherent.chain_complex import (
    CLASS_LABELS,
    ClassLabel,
    LatticeGeometry,
    Syndrome,
    canonical_representative,
    cut_parity,
)
from toric_coherent.channel import (
    Angle,
    as_angle,
    class_amplitude,
    conditional_probabilities,
    delta_lb,
    joint_probability,
    kl_matrices,
    nbar,
    syndrome_probability,
)
from toric_coherent.decoder import (
    ml_class,
    success_probability,
    twirl_ratio,
    twirled_success_probability,
)
from toric_coherent.enumerator import DEFAULT_BUDGET, SyndromeTable, even_syndromes, syndrome_table
from toric_coherent.errors import OracleGuardError

MAX_ORACLE_EDGES = 20
NEAR_TIE = 1e-12


@dataclass
class OracleTable:
    """Exact class amplitudes and stochastic class masses for every syndrome.

    ``amplitudes[(s, K)]`` is the sum of ``(i sin)^|E| cos^(E-|E|)`` over the
    chains of syndrome ``s`` (an int bitset) in class ``K``;
    ``masses[(s, K)]`` is the same coset under i.i.d. flips with
    ``p = sin^2``.
    """

    L: int
    theta: float
    amplitudes: Dict[Tuple[int, ClassLabel], complex]
    masses: Dict[Tuple[int, ClassLabel], float]
    syndromes: List[int] = field(default_factory=list)

    @property
    def geometry(self) -> LatticeGeometry:
        return LatticeGeometry(self.L)

    def total_probability(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def class_amplitudes(self, s: int) -> List[complex]:
        return [self.amplitudes[(s, k)] for k in CLASS_LABELS]

    def probability(self, s: int) -> float:
        return math.fsum(abs(a) ** 2 for a in self.class_amplitudes(s))

    def conditionals(self, s: int) -> List[float]:
        pr = self.probability(s)
        return [abs(a) ** 2 / pr for a in self.class_amplitudes(s)]

    def nbar(self, s: int, left: ClassLabel, right: ClassLabel) -> complex:
        pr = self.probability(s)
        acc = 0j
        for j in CLASS_LABELS:
            acc += self.amplitudes[(s, j ^ left)] * self.amplitudes[(s, j ^ right)].conjugate()
        return acc / pr

    def chosen(self, s: int) -> int:
        """Argmax of the conditionals; values within ``NEAR_TIE`` count as tied."""
        conds = self.conditionals(s)
        top = max(conds)
        for i, c in enumerate(conds):
            if c >= top - NEAR_TIE * max(top, 1.0):
                return i
        raise AssertionError("unreachable")

    def success(self, s: int) -> float:
        return self.conditionals(s)[self.chosen(s)]

    def twirled_success(self, s: int) -> float:
        m = [self.masses[(s, k)] for k in CLASS_LABELS]
        return m[self.chosen(s)] / math.fsum(m)


def _check_guard(geometry: LatticeGeometry) -> None:
    if geometry.num_edges > MAX_ORACLE_EDGES:
        raise OracleGuardError(
            f"brute force over 2^{geometry.num_edges} chains refused (limit 2^{MAX_ORACLE_EDGES})"
        )


def brute_force_table(geometry: LatticeGeometry, theta: Angle) -> OracleTable:
    _check_guard(geometry)
    angle = as_angle(theta)
    n_edges = geometry.num_edges
    L = geometry.L
    chains = np.arange(1 << n_edges, dtype=np.uint64)
    weights = np.bitwise_count(chains).astype(np.int64)

    syn = np.zeros_like(chains)
    for e, mask in enumerate(geometry.endpoint_masks):
        bit = (chains >> np.uint64(e)) & np.uint64(1)
        syn ^= bit * np.uint64(mask)
    w1 = np.zeros_like(chains)
    for r in range(L):
        w1 ^= (chains >> np.uint64(geometry.h(r, 0))) & np.uint64(1)
    w2 = np.zeros_like(chains)
    for c in range(L):
        w2 ^= (chains >> np.uint64(geometry.v(0, c))) & np.uint64(1)
    cut = (w1 + 2 * w2).astype(np.int64)

    syndromes = [s.bits for s in even_syndromes(geometry)]
    position = np.full(1 << geometry.num_vertices, -1, dtype=np.int64)
    offsets = np.zeros(len(syndromes), dtype=np.int64)
    for i, s in enumerate(syndromes):
        position[s] = i
        offsets[i] = cut_parity(
            geometry, canonical_representative(geometry, Syndrome(s, geometry.num_vertices))
        ).index
    idx = position[syn.astype(np.int64)]
    if np.any(idx < 0):
        raise AssertionError("chain boundary produced an odd syndrome")
    relative = cut ^ offsets[idx]
    group = idx * 4 + relative

    s, c = angle.sin, angle.cos
    with np.errstate(divide="ignore", invalid="ignore"):
        magnitude = np.power(s, weights) * np.power(c, n_edges - weights)
        p = s * s
        mass = np.power(p, weights) * np.power(1.0 - p, n_edges - weights)
    phase = weights % 4
    real = np.where(phase == 0, magnitude, np.where(phase == 2, -magnitude, 0.0))
    imag = np.where(phase == 1, magnitude, np.where(phase == 3, -magnitude, 0.0))
    n_groups = 4 * len(syndromes)
    re_sum = np.bincount(group, weights=real, minlength=n_groups)
    im_sum = np.bincount(group, weights=imag, minlength=n_groups)
    m_sum = np.bincount(group, weights=mass, minlength=n_groups)

    amplitudes: Dict[Tuple[int, ClassLabel], complex] = {}
    masses: Dict[Tuple[int, ClassLabel], float] = {}
    for i, syn_bits in enumerate(syndromes):
        for k in CLASS_LABELS:
            g = 4 * i + k.index
            amplitudes[(syn_bits, k)] = complex(re_sum[g], im_sum[g])
            masses[(syn_bits, k)] = float(m_sum[g])
    return OracleTable(L, angle.theta, amplitudes, masses, syndromes)


@njit(cache=True)
def _combination_counts(endpoint, cut_a, cut_b, target, n, k):
    # lexicographic walk over all k-subsets of n edges, boundary recomputed per subset
    res = np.zeros(4, dtype=np.int64)
    idx = np.arange(k)
    while True:
        s = 0
        a = 0
        b = 0
        for i in range(k):
            s ^= endpoint[idx[i]]
            a ^= cut_a[idx[i]]
            b ^= cut_b[idx[i]]
        if s == target:
            res[a + 2 * b] += 1
        i = k - 1
        while i >= 0 and idx[i] == n - k + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, k):
            idx[j] = idx[j - 1] + 1
    return res


def low_weight_counts(geometry: LatticeGeometry, syndrome: Syndrome, max_weight: int):
    """Number of chains of each weight ``<= max_weight`` per class, by subset enumeration.

    Returns ``{label: {weight: count}}``.  Cost is ``C(E, w)`` per weight, so
    this is meant for weights up to about 6 at L=5.
    """
    n = geometry.num_edges
    endpoint = np.array(geometry.endpoint_masks, dtype=np.int64)
    cut_a = np.zeros(n, dtype=np.int64)
    cut_b = np.zeros(n, dtype=np.int64)
    for r in range(geometry.L):
        cut_a[geometry.h(r, 0)] = 1
    for c in range(geometry.L):
        cut_b[geometry.v(0, c)] = 1
    offset = cut_parity(geometry, canonical_representative(geometry, syndrome))
    out: Dict[ClassLabel, Dict[int, int]] = {k: {} for k in CLASS_LABELS}
    for w in range(0, max_weight + 1):
        if w == 0:
            counts = np.zeros(4, dtype=np.int64)
            if syndrome.bits == 0:
                counts[0] = 1
        else:
            counts = _combination_counts(endpoint, cut_a, cut_b, syndrome.bits, n, w)
        for i in range(4):
            out[ClassLabel.from_index(i) ^ offset][w] = int(counts[i])
    return out


# ---------------------------------------------------------------------------
# cross-path comparison
# ---------------------------------------------------------------------------


@dataclass
class QuantityDeviation:
    """Deviations of one quantity over all entries.

    ``max_scaled`` is the gate metric: absolute deviation for dimensionless
    quantities, deviation divided by ``Pr(S)`` (or ``sqrt(Pr(S))`` for
    amplitudes) for the scale-dependent ones.
    """

    name: str
    max_abs: float = 0.0
    max_rel: float = 0.0
    max_scaled: float = 0.0
    worst: str = ""
    count: int = 0

    def record(self, where: str, ours: complex, reference: complex, scale: float = 1.0) -> None:
        diff = abs(complex(ours) - complex(reference))
        self.count += 1
        self.max_abs = max(self.max_abs, diff)
        if reference != 0:
            self.max_rel = max(self.max_rel, diff / abs(reference))
        scaled = diff / scale if scale > 0 else diff
        if scaled > self.max_scaled or self.count == 1:
            self.worst = where
            self.max_scaled = max(self.max_scaled, scaled)


@dataclass
class OracleReport:
    L: int
    theta: float
    tolerance: float
    quantities: Dict[str, QuantityDeviation]

    @property
    def passed(self) -> bool:
        return all(q.max_scaled <= self.tolerance for q in self.quantities.values())

    def failures(self) -> List[QuantityDeviation]:
        return [q for q in self.quantities.values() if q.max_scaled > self.tolerance]

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "theta": self.theta,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "quantities": {
                name: {
                    "max_abs": q.max_abs,
                    "max_rel": q.max_rel,
                    "max_scaled": q.max_scaled,
                    "worst": q.worst,
                    "count": q.count,
                    "passed": q.max_scaled <= self.tolerance,
                }
                for name, q in self.quantities.items()
            },
        }


def _oracle_delta_lb(oracle: OracleTable) -> float:
    zero = CLASS_LABELS[0]
    roots, ts, gs = [], [], []
    for s in oracle.syndromes:
        pr = oracle.probability(s)
        if pr == 0:
            continue
        g = oracle.nbar(s, zero, zero).real
        t = sum(oracle.nbar(s, zero, k) for k in CLASS_LABELS).real
        roots.append(pr * math.sqrt(max(t * g, 0.0)))
        ts.append(pr * t)
        gs.append(pr * g)
    value = 1.0 - math.fsum(roots) / (math.sqrt(math.fsum(ts)) * math.sqrt(math.fsum(gs)))
    return math.sqrt(max(value, 0.0))


def oracle_compare(
    geometry: LatticeGeometry,
    theta: Angle,
    tolerance: float,
    *,
    tables: Optional[Iterable[SyndromeTable]] = None,
    cache=None,
    budget: int = DEFAULT_BUDGET,
) -> OracleReport:
    """Compare every channel and decoder quantity against the brute-force oracle."""
    _check_guard(geometry)
    angle = as_angle(theta)
    oracle = brute_force_table(geometry, angle)
    if tables is None:
        tables = [
            syndrome_table(geometry, Syndrome(s, geometry.num_vertices), budget=budget, cache=cache)
            for s in oracle.syndromes
        ]
    by_bits = {t.syndrome.bits: t for t in tables}
    names = [
        "amplitude", "probability", "joint", "conditional", "nbar", "lambda", "b",
        "ml_class", "success", "twirled_success", "twirl_ratio",
        "total_probability", "averaged_success", "averaged_twirled", "delta_lb",
    ]
    q = {n: QuantityDeviation(n) for n in names}
    zero = CLASS_LABELS[0]
    avg_ours, avg_ref, tw_ours, tw_ref, total_ours = [], [], [], [], []
    for s in oracle.syndromes:
        table = by_bits[s]
        hex_s = table.syndrome.hex()
        pr_ref = oracle.probability(s)
        pr = syndrome_probability(table, angle)
        total_ours.append(pr)
        q["probability"].record(f"S={hex_s}", pr, pr_ref, pr_ref)
        for k in CLASS_LABELS:
            where = f"S={hex_s} class={k}"
            q["amplitude"].record(
                where, class_amplitude(table[k], angle).value, oracle.amplitudes[(s, k)],
                math.sqrt(pr_ref),
            )
            q["joint"].record(where, joint_probability(table, k, angle),
                              abs(oracle.amplitudes[(s, k)]) ** 2, pr_ref)
        if pr_ref == 0:
            continue
        for k, ours, ref in zip(CLASS_LABELS, conditional_probabilities(table, angle),
                                oracle.conditionals(s)):
            q["conditional"].record(f"S={hex_s} class={k}", ours, ref)
        for a in CLASS_LABELS:
            for b in CLASS_LABELS:
                q["nbar"].record(f"S={hex_s} L={a} L'={b}", nbar(table, a, b, angle),
                                 oracle.nbar(s, a, b))
        lam, bcoef = kl_matrices(table, angle)
        q["lambda"].record(f"S={hex_s}", lam, pr_ref * oracle.nbar(s, zero, zero).real, pr_ref)
        for k in CLASS_LABELS[1:]:
            q["b"].record(f"S={hex_s} L={k}", bcoef[k], pr_ref * oracle.nbar(s, zero, k), pr_ref)
        chosen = oracle.chosen(s)
        q["ml_class"].record(f"S={hex_s}", float(ml_class(table, angle).index != chosen), 0.0)
        ours_success = success_probability(table, angle)
        ours_twirled = twirled_success_probability(table, angle)
        q["success"].record(f"S={hex_s}", ours_success, oracle.success(s))
        q["twirled_success"].record(f"S={hex_s}", ours_twirled, oracle.twirled_success(s))
        q["twirl_ratio"].record(f"S={hex_s}", twirl_ratio(table, angle),
                                oracle.twirled_success(s) / oracle.success(s))
        masses = [oracle.masses[(s, k)] for k in CLASS_LABELS]
        avg_ours.append(pr * ours_success)
        avg_ref.append(pr_ref * oracle.success(s))
        tw_ours.append(math.fsum(masses) * ours_twirled)
        tw_ref.append(masses[chosen])
    q["total_probability"].record("all", math.fsum(total_ours), oracle.total_probability())
    q["averaged_success"].record("all", math.fsum(avg_ours), math.fsum(avg_ref))
    q["averaged_twirled"].record("all", math.fsum(tw_ours), math.fsum(tw_ref))
    q["delta_lb"].record("all", delta_lb(list(by_bits.values()), angle), _oracle_delta_lb(oracle))
    return OracleReport(geometry.L, angle.theta, tolerance, q)
