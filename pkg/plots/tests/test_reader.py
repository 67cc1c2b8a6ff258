import math

import numpy as np
import pytest

from gameplots.reader import (
    EXPECTED_HEADER,
    SchemaError,
    curve_stats,
    load_runs,
    pooled_column,
)

from artifacts import HEADER, make_rows, write_artifact


def test_load_runs_groups_by_seed(artifact):
    runs = load_runs(artifact)
    assert sorted(runs) == [0, 1]
    cols = runs[1]
    assert cols["t"].tolist() == [1.0, 2.0, 3.0, 4.0]
    assert cols["expected_payoff"][2] == pytest.approx(0.1 * 1 - 0.05 * 3)
    assert cols["x_probs"].shape == (4, 2)
    assert np.allclose(cols["y_probs"][0], [0.25, 0.75])


def test_full_precision_round_trip(tmp_path):
    value = 0.1 + 0.2 + 1e-17
    rows = make_rows(seeds=(0,), rounds=1, payoff_of=lambda s, t: value)
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    assert runs[0]["expected_payoff"][0] == value


def test_sentinel_parses_to_inf(tmp_path):
    rows = make_rows(seeds=(0,), rounds=2, kl_of=lambda s, t: math.inf)
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    assert np.isinf(runs[0]["kl_x"]).all()


def test_missing_column_named_in_error(tmp_path):
    header = [name for name in HEADER if name != "kl_x"]
    rows = [row[:-2] + row[-1:] for row in make_rows(seeds=(0,), rounds=1)]
    path = write_artifact(tmp_path / "bad.csv", rows, header=header)
    with pytest.raises(SchemaError, match="missing columns: kl_x"):
        load_runs(path)


def test_unexpected_column_named_in_error(tmp_path):
    header = HEADER + ["bonus"]
    rows = [row + ["1.0"] for row in make_rows(seeds=(0,), rounds=1)]
    path = write_artifact(tmp_path / "bad.csv", rows, header=header)
    with pytest.raises(SchemaError, match="unexpected columns: bonus"):
        load_runs(path)


def test_reordered_header_rejected(tmp_path):
    header = list(reversed(HEADER))
    path = write_artifact(tmp_path / "bad.csv", [], header=header)
    with pytest.raises(SchemaError, match="column order differs"):
        load_runs(path)


def test_short_row_rejected(tmp_path):
    rows = make_rows(seeds=(0,), rounds=1)
    rows[0] = rows[0][:5]
    path = write_artifact(tmp_path / "bad.csv", rows)
    with pytest.raises(SchemaError, match="5 fields"):
        load_runs(path)


def test_header_only_file_is_empty_seed_set(tmp_path):
    path = write_artifact(tmp_path / "empty.csv", [])
    with pytest.raises(ValueError, match="no data rows"):
        load_runs(path)


def test_truly_empty_file(tmp_path):
    path = tmp_path / "none.csv"
    path.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        load_runs(str(path))


def test_curve_stats_mean_and_population_std(tmp_path):
    rows = make_rows(seeds=(0, 1), rounds=3, payoff_of=lambda s, t: float(s))
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    (mean, std), dropped = curve_stats(runs, "expected_payoff")
    assert dropped == 0
    assert np.allclose(mean, 0.5)
    assert np.allclose(std, 0.5)


def test_curve_stats_drops_sentinels_pointwise(tmp_path):
    rows = make_rows(
        seeds=(0, 1),
        rounds=2,
        kl_of=lambda s, t: math.inf if (s == 0 and t == 1) else 3.0,
    )
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    (mean, std), dropped = curve_stats(runs, "kl_x")
    assert dropped == 1
    assert mean.tolist() == [3.0, 3.0]
    assert std.tolist() == [0.0, 0.0]


def test_curve_stats_all_sentinel_round_is_nan(tmp_path):
    rows = make_rows(seeds=(0, 1), rounds=2, kl_of=lambda s, t: math.inf if t == 1 else 1.0)
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    (mean, _), dropped = curve_stats(runs, "kl_x")
    assert dropped == 2
    assert math.isnan(mean[0]) and mean[1] == 1.0


def test_curve_stats_rejects_ragged_seeds(tmp_path):
    rows = make_rows(seeds=(0,), rounds=3) + make_rows(seeds=(1,), rounds=2)
    runs = load_runs(write_artifact(tmp_path / "a.csv", rows))
    with pytest.raises(ValueError, match="round count"):
        curve_stats(runs, "expected_payoff")


def test_pooled_column_covers_all_rows(artifact):
    pooled = pooled_column(load_runs(artifact), "abs_regret_cum")
    assert pooled.shape == (8,)
    assert sorted(pooled.tolist()).count(0.05) == 2


def test_header_constant_matches_contract():
    assert EXPECTED_HEADER == HEADER
