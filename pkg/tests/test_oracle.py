import json
import math
import time

import pytest

from toric_coherent.cache import EnumeratorCache
from toric_coherent.chain_complex import CLASS_LABELS, TRIVIAL, LatticeGeometry
from toric_coherent.channel import class_amplitude
from toric_coherent.enumerator import all_syndrome_tables
from toric_coherent.errors import OracleGuardError
from toric_coherent.oracle import brute_force_table, oracle_compare


def test_identity_at_zero_angle(geom2):
    o = brute_force_table(geom2, 0.0)
    nonzero = {k: v for k, v in o.amplitudes.items() if v != 0}
    assert nonzero == {(0, TRIVIAL): 1}
    assert len(o.amplitudes) == 2 ** 3 * 4


@pytest.mark.parametrize("theta", [0.1, 0.3, 0.7])
def test_unitarity(geom2, geom3, theta):
    assert abs(brute_force_table(geom2, theta).total_probability() - 1) < 1e-12
    assert abs(brute_force_table(geom3, theta).total_probability() - 1) < 1e-10


def test_per_entry_amplitudes_l3(geom3, tables3):
    o = brute_force_table(geom3, 0.1)
    for t in tables3:
        for k in CLASS_LABELS:
            assert abs(class_amplitude(t[k], 0.1).value - o.amplitudes[(t.syndrome.bits, k)]) < 1e-10


def test_guard():
    with pytest.raises(OracleGuardError):
        brute_force_table(LatticeGeometry(4), 0.1)
    with pytest.raises(OracleGuardError):
        oracle_compare(LatticeGeometry(4), 0.1, 1e-10)


def test_compare_l2(geom2, tables2):
    start = time.perf_counter()
    r = oracle_compare(geom2, 0.1, 1e-12, tables=tables2)
    assert time.perf_counter() - start < 1.0
    assert r.passed, r.to_dict()
    assert set(r.quantities) >= {"probability", "conditional", "nbar", "lambda", "b", "success",
                                 "twirled_success", "twirl_ratio", "delta_lb"}
    json.dumps(r.to_dict())


@pytest.mark.parametrize("theta", [0.05, 0.2])
def test_compare_l3(geom3, tables3, theta):
    r = oracle_compare(geom3, theta, 1e-10, tables=tables3)
    assert r.passed, [q.name for q in r.failures()]


def test_corrupted_cache_is_caught(tmp_path, geom2):
    cache = EnumeratorCache(tmp_path)
    list(all_syndrome_tables(geom2, cache=cache))
    lines = cache.path(2).read_text().splitlines()
    rec = json.loads(lines[5])
    rec["degeneracies"][-1] = str(int(rec["degeneracies"][-1]) + 3)
    lines[5] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
    cache.path(2).write_text("\n".join(lines) + "\n")
    r = oracle_compare(geom2, 0.3, 1e-12, cache=EnumeratorCache(tmp_path))
    assert not r.passed
    worst = r.quantities["amplitude"].worst
    assert f"S={rec['syndrome']}" in worst and f"class={rec['class']}" in worst
