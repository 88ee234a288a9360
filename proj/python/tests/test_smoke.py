import pytest

import rclsim

TRACE_CONFIG = """
mode = rcl-s
seed = 0x1
alloc = 0x400000 4 random-permutation
alloc = 0x10000000 8 random-permutation
"""

BITMAP_CONFIG = """
mode = rcl-n
alloc = 0x40000000 512 large-page
[l1d]
ways = 4
set_bits = 6
rand_bits = {k}
"""


@pytest.fixture
def trace():
    return rclsim.generate_trace("multi-page", length=600, seed=3, code_pages=4, data_pages=8)


def test_config_round_trip():
    cfg = rclsim.Config.parse(TRACE_CONFIG)
    assert cfg.mode == "rcl-s"
    assert rclsim.Config.parse(cfg.to_text()) == cfg


def test_unknown_key_rejected():
    with pytest.raises(rclsim.ConfigError):
        rclsim.Config.parse("mode = rcl-s\nnot_a_key = 1\n")


def test_zero_tables_match_baseline(trace):
    cfg = rclsim.Config.parse(TRACE_CONFIG)
    base = rclsim.run_trace(cfg, trace, mode="baseline")
    for mode in ("rcl-n", "rcl-s", "rcl-llc"):
        r = rclsim.run_trace(cfg, trace, mode=mode, zero_rt=True, check_inclusion=True)
        assert r["l1_hits"] == base["l1_hits"]
        assert r["llc_hits"] == base["llc_hits"]


def test_overhead_ordering(trace):
    cfg = rclsim.Config.parse(TRACE_CONFIG)
    cycles = {row["mode"]: row["total_cycles"] for row in rclsim.overhead(cfg, trace)}
    assert cycles["rcl-n"] >= cycles["rcl-s"] >= cycles["baseline"]


def test_unmapped_access_faults():
    cfg = rclsim.Config.parse(TRACE_CONFIG)
    with pytest.raises(rclsim.SimulationFault):
        rclsim.run_trace(cfg, "R 0xdead0000\n")


@pytest.mark.parametrize("k,period", [(6, 64), (9, 512)])
def test_bitmap_period(k, period):
    run = rclsim.run_bitmap(rclsim.Config.parse(BITMAP_CONFIG.format(k=k)))
    assert run["period"] == period
    assert run["pbm"].startswith("P1\n")
    assert all(sum(row[p] for row in run["bits"]) == 1 for p in range(512))


def test_attack_trials():
    cfg = rclsim.Config()
    cfg.scenario = "noise"
    cfg.mode = "rcl-llc"
    cfg.trials = 5
    rows = rclsim.run_attack(cfg)
    assert [r["trial"] for r in rows] == list(range(5))
    assert all(r["set_size"] == 8 for r in rows)


def test_random_table_and_index():
    entries = rclsim.random_table(6, 6, 0x42)
    assert len(entries) == 64 and all(0 <= e < 64 for e in entries)
    assert rclsim.random_table(6, 6, 0x42) == entries
    assert rclsim.dump_random_table(6, 6, 0x42).startswith("rt s=6 k=6 seed=")
    va = pa = 0x12345 << 6
    assert rclsim.index_rcl_l1(va, pa, [0] * 64, 6, 6) == rclsim.index_baseline(va, 6)
