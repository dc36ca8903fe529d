import json
import math
import os
from pathlib import Path

import pytest

import divbar

CONFIGS = Path(os.environ.get("DIVBAR_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


@pytest.fixture(scope="module")
def fig1():
    return divbar.solve(divbar.load_config(CONFIGS / "fig1.json"))


def test_fig1_barriers(fig1):
    assert fig1.barrier(1, "00") == pytest.approx(0.19350092330851373, abs=1e-9)
    assert fig1.barrier(2, "10") == pytest.approx(0.11707617799050213, abs=1e-9)
    assert fig1.barrier(1, "00") > fig1.barrier(1, "01")
    assert fig1.barrier(2, "00") > fig1.barrier(2, "10")
    assert len(fig1.barriers()) == 4


def test_value_is_separable_and_affine_above_barriers(fig1):
    m1, m2 = fig1.barrier(1), fig1.barrier(2)
    v = fig1.value([m1, m2])
    assert v == pytest.approx(fig1.component_value(1, m1) + fig1.component_value(2, m2))
    assert fig1.value([m1 + 1.0, m2 + 2.0]) == pytest.approx(v + 0.4 * 1.0 + 0.6 * 2.0)
    assert fig1.value([0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)


def test_verify_passes(fig1):
    report = divbar.verify(fig1, points=100)
    assert report
    assert all(e["passed"] for e in report if e["hard"])


def test_explicit2_matches(fig1):
    diffs = divbar.compare_explicit2(fig1)
    assert diffs is not None
    assert max(diffs.values()) <= 1e-6


def test_simulate_trivial_cases(fig1):
    ruin = divbar.simulate(fig1, [0.0, 0.0], paths=10)
    assert ruin["estimate"] == 0.0
    lump = divbar.simulate(fig1, [0.3, 0.2], scale=0.0, paths=10)
    assert lump["estimate"] == pytest.approx(0.4 * 0.3 + 0.6 * 0.2)


def test_policy_json_round_trip(fig1):
    doc = json.loads(fig1.to_json())
    assert len(doc["components"]) == 4
    assert doc["params"]["n"] == 2


def test_invalid_config_raises():
    params = divbar.parse_config('{"n": 1, "drift": [0.1], "vol": [-0.1], "discount": 0.05, "weights": [1.0], "intensity": {"table": {"0": [0.01]}}}')
    assert any(field == "vol" for field, _ in divbar.validate(params))
    with pytest.raises(ValueError):
        divbar.solve(params)


def test_cli_barriers():
    code, out, err = divbar.run_cli(["barriers", "--config", str(CONFIGS / "fig1.json")])
    assert code == 0, err
    assert out.splitlines()[0] == "state,subsidiary,m,C"
    assert math.isclose(float(out.splitlines()[1].split(",")[2]), 0.19350092330851373, abs_tol=1e-9)
