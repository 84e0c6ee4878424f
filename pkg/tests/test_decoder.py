import math
import random
from fractions import Fraction

import numpy as np
import pytest

from toric_coherent.chain_complex import CLASS_LABELS, TRIVIAL, ClassLabel, LatticeGeometry
from toric_coherent.channel import conditional_probabilities
from toric_coherent.decoder import (
    averaged_success_exact,
    averaged_success_sampled,
    decode,
    make_rng,
    ml_class,
    sample_syndromes,
    success_probability,
    twirl_ratio,
    twirl_ratio_leading,
    twirled_success_probability,
)
from toric_coherent.enumerator import SyndromeTable, WeightEnumerator, poly_D, poly_Z, syndrome_table
from toric_coherent.errors import PreconditionError, UndefinedConditionalError
from toric_coherent.oracle import brute_force_table

GRID = np.linspace(0.01, 0.3, 30)


def synthetic_table(specs, L=3):
    g = LatticeGeometry(L)
    enums = tuple(
        WeightEnumerator(l, tuple(d), L=L, syndrome="000", label=k)
        for (l, d), k in zip(specs, CLASS_LABELS)
    )
    return SyndromeTable(L, g.empty_syndrome(), enums)


def test_ml_class_examples(geom3, tables3):
    s0 = syndrome_table(geom3, geom3.empty_syndrome())
    assert ml_class(s0, 0.05) == TRIVIAL
    for t in tables3:
        assert ml_class(t, 1e-4) == t.minimal_label()
    with pytest.raises(UndefinedConditionalError):
        ml_class(tables3[5], 0.0)


def test_ml_class_matches_oracle(geom3, tables3):
    oracle = brute_force_table(geom3, 0.1)
    for t in random.Random(5).sample(tables3, 40):
        assert ml_class(t, 0.1).index == oracle.chosen(t.syndrome.bits)


def test_argmax_invariant_under_scaling(tables3):
    for t in tables3[::9]:
        scaled = SyndromeTable(t.L, t.syndrome, tuple(
            WeightEnumerator(e.l_min, tuple(3 * d for d in e.degeneracies), L=e.L,
                             syndrome=e.syndrome, label=e.label) for e in t))
        for theta in (0.05, 0.25):
            assert ml_class(scaled, theta) == ml_class(t, theta)


def test_ties_break_to_smallest_label():
    t = synthetic_table([(2, [1]), (2, [1]), (2, [1]), (2, [1])])
    assert ml_class(t, 0.1) == TRIVIAL
    t = synthetic_table([(4, [1]), (2, [1]), (2, [1]), (4, [1])])
    assert ml_class(t, 0.1) == ClassLabel(1, 0)


def test_success_examples(geom2, geom3):
    s0 = syndrome_table(geom2, geom2.empty_syndrome())
    assert success_probability(s0, 0.0) == 1
    oracle = brute_force_table(geom2, 0.2)
    assert abs(success_probability(s0, 0.2) - oracle.success(0)) < 1e-12
    t3 = syndrome_table(geom3, geom3.empty_syndrome())
    values = [success_probability(t3, th) for th in GRID]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert success_probability(t3, 0.1) == pytest.approx(max(conditional_probabilities(t3, 0.1)))


def test_twirled_success_examples(geom2, tables2):
    assert twirled_success_probability(tables2[0], 0.0) == 1
    oracle = brute_force_table(geom2, 0.17)
    for t in tables2:
        assert abs(twirled_success_probability(t, 0.17) - oracle.twirled_success(t.syndrome.bits)) < 1e-12
    single = synthetic_table([(2, [1]), (4, [3]), (4, [2]), (6, [5])])
    assert twirled_success_probability(single, 1e-5) == pytest.approx(1.0, abs=1e-12)


def test_twirl_ratio_examples(geom2, tables2, tables3):
    assert twirl_ratio(tables2[0], 0.0) == 1
    oracle = brute_force_table(geom2, 0.1)
    for t in tables2:
        s = t.syndrome.bits
        assert abs(twirl_ratio(t, 0.1) - oracle.twirled_success(s) / oracle.success(s)) < 1e-10
    # both evaluation routes agree or twirl_ratio raises
    for t in tables3:
        for theta in GRID[::3]:
            twirl_ratio(t, theta)


def test_ratio_can_drop_below_one(geom2):
    # every vertex flagged: the decoded class has four shortest chains while
    # its competitors have two, so coherence helps this syndrome
    t = syndrome_table(geom2, geom2.syndrome(range(4)))
    assert t[ml_class(t, 0.1)].d0 == 4
    assert twirl_ratio(t, 0.1) < 1


def test_leading_ratio_examples():
    even = synthetic_table([(2, [2]), (4, [2]), (4, [2]), (6, [2])])
    lead = twirl_ratio_leading(even)
    assert lead.terms == {0: 1, 4: 0, 8: 0}
    assert lead.evaluate(0.3) == 1
    gap = synthetic_table([(2, [1]), (3, [2]), (5, [1]), (5, [1])])
    lead = twirl_ratio_leading(gap)
    assert lead.reference == TRIVIAL
    assert lead.terms[2] == Fraction(2)
    assert not lead.is_tie
    tied = synthetic_table([(2, [1]), (2, [1]), (4, [1]), (4, [1])])
    assert twirl_ratio_leading(tied).tied == (ClassLabel(1, 0),)


def test_leading_ratio_residual(tables3):
    x = 1e-3
    theta = math.atan(x)
    for t in random.Random(2).sample(tables3, 30):
        lead = twirl_ratio_leading(t)
        if lead.is_tie:
            continue
        e1 = t[lead.reference]
        gaps = sorted({k.l_min - e1.l_min for k in t if k.label != lead.reference})
        residual = abs(twirl_ratio(t, theta) - lead.evaluate(x))
        # next order beyond the retained terms is at least x^(2 * smallest gap + 2)
        assert residual <= 50 * x ** (2 * gaps[0] + 2) * max(1.0, max(lead.terms.values()))


def test_decode_outcome(tables3):
    out = decode(tables3[3], 0.1)
    assert out.coherent_conditionals[out.chosen.index] == max(out.coherent_conditionals)
    assert 0 < out.success <= 1 and 0 < out.twirled_success <= 1
    assert out.ratio == pytest.approx(out.twirled_success / out.success)


def test_averaged_exact_examples(geom2, tables2):
    a = averaged_success_exact(geom2, 0.0, tables=tables2)
    assert a.coherent == 1 and a.twirled == 1
    oracle = brute_force_table(geom2, 0.1)
    ref = math.fsum(oracle.probability(s) * oracle.success(s) for s in oracle.syndromes)
    assert abs(averaged_success_exact(geom2, 0.1, tables=tables2).coherent - ref) < 1e-12
    ref_tw = math.fsum(
        oracle.masses[(s, CLASS_LABELS[oracle.chosen(s)])] for s in oracle.syndromes)
    assert abs(averaged_success_exact(geom2, 0.1, tables=tables2).twirled - ref_tw) < 1e-12


@pytest.mark.parametrize("fixture", ["tables2", "tables3"])
@pytest.mark.parametrize("theta", [0.05, 0.1, 0.2])
def test_averaged_coherent_not_above_twirled(fixture, theta, request):
    tables = request.getfixturevalue(fixture)
    a = averaged_success_exact(LatticeGeometry(tables[0].L), theta, tables=tables)
    assert a.coherent <= a.twirled


def test_sampled_at_zero_angle(geom3):
    s = averaged_success_sampled(geom3, 0.0, 50, seed=1)
    assert (s.estimate, s.stderr, s.count) == (1.0, 0.0, 50)


def test_sampled_weight_at_s0(geom2):
    # with every sample at S=0 the estimate is exactly Z_max / sum D of that table
    t = syndrome_table(geom2, geom2.empty_syndrome())
    x = math.tan(0.1)
    z = [poly_Z(e).evaluate(x) for e in t]
    d = [poly_D(e).evaluate(x) for e in t]
    weight = math.fsum(z) / math.fsum(d)
    drawn = sample_syndromes(geom2, 0.1, 200, seed=3)
    est = averaged_success_sampled(geom2, 0.1, 200, seed=3)
    values = []
    for s in drawn:
        ts = syndrome_table(geom2, geom2.syndrome([i for i in range(4) if (s >> i) & 1]))
        zs = [poly_Z(e).evaluate(x) for e in ts]
        ds = [poly_D(e).evaluate(x) for e in ts]
        values.append(max(zs) / math.fsum(ds))
    assert est.estimate == pytest.approx(math.fsum(values) / len(values), rel=1e-14)
    assert max(z) / math.fsum(d) == pytest.approx(weight * max(z) / math.fsum(z), rel=1e-14)


def test_sampled_within_stderr_l3(geom3, tables3):
    exact = averaged_success_exact(geom3, 0.1, tables=tables3).coherent
    s = averaged_success_sampled(geom3, 0.1, 1000, seed=0)
    assert abs(s.estimate - exact) <= 3 * s.stderr


@pytest.mark.parametrize("theta", [0.05, 0.2])
def test_sampled_unbiased_l2(geom2, tables2, theta):
    exact = averaged_success_exact(geom2, theta, tables=tables2)
    coh = averaged_success_sampled(geom2, theta, 10_000, seed=0)
    assert abs(coh.estimate - exact.coherent) <= 4 * coh.stderr
    tw = averaged_success_sampled(geom2, theta, 10_000, seed=1, quantity="twirled")
    assert abs(tw.estimate - exact.twirled) <= 4 * tw.stderr


def test_sampling_contract(geom3):
    a = averaged_success_sampled(geom3, 0.1, 300, seed=5)
    b = averaged_success_sampled(geom3, 0.1, 300, seed=5)
    assert a == b
    assert a.stderr == pytest.approx(a.stderr)
    assert make_rng(9).random() == make_rng(9).random()
    with pytest.raises(PreconditionError):
        averaged_success_sampled(geom3, 0.1, 0, seed=1)
    with pytest.raises(PreconditionError):
        averaged_success_sampled(geom3, 0.1, 10, seed=1, quantity="other")
