import random

import pytest
from hypothesis import given, settings, strategies as st

from homeseq.errors import ValidationError
from homeseq.wsdd import (
    MiningParams,
    WsddMiner,
    mine,
    mine_wildcarded,
    periodicity,
    support_map,
    write_patterns_jsonl,
)


def ts_for(seq):
    return [float(60 * i) for i in range(len(seq))]


def test_alternating_pair_counts():
    # seq a,b,a,b,a,b: (a,b) occurs at starts 0,2,4; (b,a) at 1,3
    seq = ["a", "b", "a", "b", "a", "b"]
    patterns = mine(seq, ts_for(seq), MiningParams(max_window=2, min_support=0.0))
    smap = support_map(patterns)
    assert smap[("a", "b")] == 3
    assert smap[("b", "a")] == 2
    by_key = {p.symbols: p for p in patterns}
    assert by_key[("a", "b")].occurrence_starts == (0, 2, 4)
    assert by_key[("a", "b")].relative_support == 3 / 5


def test_empty_and_single_sequences():
    assert mine([], None, MiningParams()) == []
    assert mine(["a"], [0.0], MiningParams()) == []


def test_window_three_counts():
    seq = ["a", "b", "a", "b", "a", "b"]
    smap = support_map(mine(seq, ts_for(seq), MiningParams(max_window=3, min_support=0.0)))
    assert smap[("a", "b", "a")] == 2
    assert smap[("b", "a", "b")] == 2


def test_wildcard_example():
    # a,x,a,y,a: (a,*,a) matches at starts 0 and 2; (a,x,a) only at 0
    seq = ["a", "x", "a", "y", "a"]
    params = MiningParams(max_window=3, min_support=0.0, max_wildcards=1)
    smap = support_map(mine_wildcarded(seq, ts_for(seq), params))
    assert smap[("a", "*", "a")] == 2
    assert smap[("a", "x", "a")] == 1


def test_wildcards_zero_is_plain_mine():
    rng = random.Random(5)
    seq = [rng.choice("abc") for _ in range(120)]
    params = MiningParams(max_window=4, min_support=0.0, max_wildcards=0)
    assert support_map(mine_wildcarded(seq, ts_for(seq), params)) == \
        support_map(mine(seq, ts_for(seq), params))


def test_wildcard_positions_are_interior_and_reported():
    seq = ["a", "x", "a", "y", "a"]
    params = MiningParams(max_window=3, min_support=0.0, max_wildcards=1)
    for pattern in mine(seq, ts_for(seq), params):
        for pos in pattern.wildcard_positions:
            assert 0 < pos < pattern.length - 1
    wild = [p for p in mine(seq, ts_for(seq), params) if p.is_wildcarded]
    assert wild and all(p.wildcard_positions == (1,) for p in wild)


def test_min_support_is_strict_and_filtering_monotone():
    seq = ["a", "b"] * 10
    ts = ts_for(seq)
    # (a,b) has rel support 10/19; a threshold exactly equal must exclude it
    threshold = 10 / 19
    smap = support_map(mine(seq, ts, MiningParams(max_window=2, min_support=threshold)))
    assert ("a", "b") not in smap
    all_patterns = support_map(mine(seq, ts, MiningParams(max_window=2, min_support=0.0)))
    assert set(smap) <= set(all_patterns)


def test_result_is_canonically_sorted_and_deterministic():
    rng = random.Random(8)
    seq = [rng.choice("abcd") for _ in range(300)]
    ts = ts_for(seq)
    params = MiningParams(max_window=4, min_support=0.005, max_wildcards=1)
    first = mine(seq, ts, params)
    second = mine(seq, ts, params)
    assert first == second
    keys = [(-p.support_count, p.length, p.symbols) for p in first]
    assert keys == sorted(keys)


def test_occurrence_starts_strictly_increasing():
    rng = random.Random(2)
    seq = [rng.choice("ab") for _ in range(200)]
    for pattern in mine(seq, ts_for(seq), MiningParams(max_window=4, min_support=0.0)):
        starts = pattern.occurrence_starts
        assert all(a < b for a, b in zip(starts, starts[1:]))
        assert pattern.support_count == len(starts)


def test_parameter_validation():
    with pytest.raises(ValidationError):
        mine(["a", "b"], [0.0, 1.0], MiningParams(max_window=1))
    with pytest.raises(ValidationError):
        mine(["a", "b"], [0.0, 1.0], MiningParams(min_support=1.5))
    with pytest.raises(ValidationError):
        mine(["a", "b"], [0.0], MiningParams())
    with pytest.raises(ValidationError):
        mine(["a", "b"], [1.0, 0.0], MiningParams())
    with pytest.raises(ValidationError):
        mine(["a", "*"], [0.0, 1.0], MiningParams())


def test_periodicity_constant_interval():
    info = periodicity([0.0, 100.0, 200.0, 300.0], threshold=0.15)
    assert info.is_periodic
    assert info.mean_interval == pytest.approx(100.0)
    assert info.interval_cv == pytest.approx(0.0)


def test_periodicity_irregular_intervals():
    # intervals 50 and 250: mean 150, population stddev 100 -> cv 2/3
    info = periodicity([0.0, 50.0, 300.0], threshold=0.15)
    assert not info.is_periodic
    assert info.mean_interval == pytest.approx(150.0)
    assert info.interval_cv == pytest.approx(100.0 / 150.0)


def test_periodicity_insufficient_occurrences():
    assert periodicity([5.0]) == periodicity([5.0])
    single = periodicity([5.0])
    assert not single.is_periodic and single.mean_interval is None
    pair = periodicity([0.0, 60.0])
    assert not pair.is_periodic  # needs at least three occurrences
    assert pair.mean_interval == pytest.approx(60.0)


def test_mined_pattern_carries_periodicity():
    # plant (p,q) every 10 events in otherwise unique noise
    seq = []
    for i in range(200):
        if i % 10 in (0, 1):
            seq.append("p" if i % 10 == 0 else "q")
        else:
            seq.append(f"n{i}")
    patterns = mine(seq, [float(i) for i in range(len(seq))],
                    MiningParams(max_window=2, min_support=0.05))
    by_key = {p.symbols: p for p in patterns}
    info = by_key[("p", "q")].periodicity
    assert info.is_periodic
    assert info.mean_interval == pytest.approx(10.0)


def test_export_schema():
    seq = ["a", "b", "a", "b"]
    patterns = mine(seq, ts_for(seq), MiningParams(max_window=2, min_support=0.0))
    import json
    lines = write_patterns_jsonl(patterns, event_count=len(seq)).decode().splitlines()
    rec = json.loads(lines[0])
    assert set(rec) == {"pattern", "count", "rel_support", "periodic",
                        "mean_interval_s", "rel_support_events"}
    assert isinstance(rec["pattern"], list)


def test_estimator_interface():
    seq = ["a", "b", "a", "b", "a", "b"]
    miner = WsddMiner(max_window=2, min_support=0.0)
    assert miner.get_params()["max_window"] == 2
    miner.fit(seq, timestamps=ts_for(seq))
    assert miner.support_map_()[("a", "b")] == 3
    clone_params = WsddMiner(**miner.get_params())
    assert clone_params.get_params() == miner.get_params()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from("abc"), max_size=60),
       st.integers(min_value=2, max_value=5))
def test_relative_support_matches_definition(symbols, max_window):
    patterns = mine(symbols, None, MiningParams(max_window=max_window, min_support=0.0))
    n = len(symbols)
    for p in patterns:
        assert p.relative_support == pytest.approx(p.support_count / (n - p.length + 1))
        assert 2 <= p.length <= max_window
