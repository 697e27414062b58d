import numpy as np
import pytest

from pilotsim.errors import ConfigError
from pilotsim.experiments import CSV_HEADER, SweepSpec, drop_seed, emit_csv, evaluate_drop, run_sweep
from pilotsim.scenario import SystemConfig

SMALL = SystemConfig(num_cells=3, users_per_cell=4, num_antennas=16)


def test_empty_result_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    text = emit_csv(None, path)
    assert text == ",".join(CSV_HEADER) + "\n"
    assert path.read_text(encoding="utf-8") == text


def test_row_cardinality_and_order():
    spec = SweepSpec("antennas", [8, 16, 32, 64], SMALL, n_trials=100, n_drops=1,
                     modes=("mc", "cf_consistent"))
    result = run_sweep(spec)
    lines = emit_csv(result).splitlines()
    assert len(lines) == 1 + 16
    keys = [tuple(line.split(",")[1:4]) for line in lines[1:]]
    assert keys == sorted(keys, key=lambda k: (int(k[0]), k[1], k[2]))
    assert {k[1] for k in keys} == {"MRT", "ZF"}


def test_same_spec_twice_identical(tmp_path):
    spec = SweepSpec("cells", [2, 3], SMALL, n_drops=3, seed=12)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_sweep(spec), a)
    emit_csv(run_sweep(spec), b)
    assert a.read_bytes() == b.read_bytes()


def test_worker_count_does_not_change_output():
    spec = SweepSpec("pilot_reuse", [1, 2, 3], SMALL, n_trials=100, n_drops=2, seed=3,
                     modes=("mc", "cf_consistent", "cf_paper"))
    assert emit_csv(run_sweep(spec, workers=1)) == emit_csv(run_sweep(spec, workers=3))


def test_zf_rows_marked_not_fatal():
    spec = SweepSpec("antennas", [2, 4, 8], SMALL.replace(users_per_cell=4), n_drops=1)
    rows = {(r["value"], r["precoder"]): r for r in run_sweep(spec).rows}
    assert rows[2, "ZF"]["error"] == "InsufficientAntennas"
    assert rows[4, "ZF"]["error"] == "InsufficientAntennas"
    assert rows[8, "ZF"]["error"] == ""
    assert rows[2, "MRT"]["error"] == ""
    assert "rate_total" not in rows[2, "ZF"]


def test_overhead_rows_marked():
    base = SystemConfig(num_cells=7, users_per_cell=10, coherence_block=200, grouping_enabled=True,
                        grouping_threshold=1e9)  # every user is edge: T_p = 70 * 1 cell... = 70
    spec = SweepSpec("cells", [2, 20], base, n_drops=1)
    rows = {r["value"]: r for r in run_sweep(spec).rows}
    assert rows[2]["error"] == ""
    assert rows[20]["error"] == "PilotOverheadExceedsCoherence"


def test_common_drops_across_values():
    assert drop_seed(0, 1) == drop_seed(0, 1)
    assert len({drop_seed(s, d) for s in range(5) for d in range(5)}) == 25


def test_evaluate_drop_record():
    out = evaluate_drop(SMALL, 1, ("MRT",), ("cf_consistent", "cf_paper"))
    rec = out["MRT", "cf_consistent"]
    assert rec["rate"].shape == (3, 4)
    assert rec["prelog"] == pytest.approx(1 - 4 / 200)
    np.testing.assert_allclose(rec["rate"], rec["prelog"] * np.log2(1 + rec["gamma"]))
    assert rec["k_center"] + rec["k_edge"] == 4
    with pytest.raises(KeyError):
        out["ZF", "mc"]
    assert evaluate_drop(SMALL, 1, ("MRT",), ("mc",), n_trials=10)["MRT", "mc"]["error"] == "ConfigError"


def test_aggregate_fields():
    spec = SweepSpec("antennas", [16, 64], SMALL, n_drops=4, precoders=("MRT",))
    rows = run_sweep(spec).rows
    for row in rows:
        assert len(row["rate_per_cell"]) == 3
        assert row["rate_total"] == pytest.approx(np.mean(row["rate_per_cell"]))
        assert row["rate_mean_user"] == pytest.approx(row["rate_total"] / 4)
        assert row["ci95"] > 0
    assert rows[1]["rate_total"] > rows[0]["rate_total"]


@pytest.mark.parametrize("kwargs", [
    dict(swept_parameter="power", values=[1]),
    dict(swept_parameter="antennas", values=[]),
    dict(swept_parameter="antennas", values=[64, 32]),
    dict(swept_parameter="antennas", values=[32, 32]),
    dict(swept_parameter="antennas", values=[32], precoders=("MMSE",)),
    dict(swept_parameter="antennas", values=[32], modes=("exact",)),
    dict(swept_parameter="antennas", values=[32], n_drops=0),
    dict(swept_parameter="antennas", values=[0]),
    dict(swept_parameter="pilot_reuse", values=[1, 50]),
])
def test_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        SweepSpec(base_config=SystemConfig(), **kwargs)
