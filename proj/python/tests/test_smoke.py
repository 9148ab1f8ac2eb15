import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import pytest

import horseshoe as hs

ROOT = Path(__file__).resolve().parents[2]
ONE_THIRD = {"family": {"lambda_s": 1.0 / 3.0, "lambda_u": 3.0}}


def validate(doc, name):
    jsonschema.validate(doc, hs.schema(name))


def test_default_config_round_trip():
    cfg = hs.default_config()
    validate(cfg, "run_config")
    assert cfg["schema"] == "horseshoe/run_config/v1"
    assert cfg == json.loads((ROOT / "configs" / "default.json").read_text())
    assert hs.config_warnings() == ["tau is not below beta - 1"]


def test_shipped_configs_validate():
    for path in (ROOT / "configs").glob("*.json"):
        validate(json.loads(path.read_text()), "run_config")


def test_unknown_key_is_value_error():
    with pytest.raises(ValueError, match="ConfigError"):
        hs.build({"bogus": 1})


def test_build_summary_and_dump_lines():
    summary, dump, geometry = hs.build()
    validate(summary, "build_summary")
    lines = dump.splitlines()
    # Pure cylinders of n transitions have width 0.284^n; keep those above the 1e-9 floor.
    n_max = math.floor(math.log(1e-9) / math.log(0.284))
    assert summary["elements"] == len(lines) - 1 == 2 ** (n_max + 2) - 2
    for line in lines[:50]:
        validate(json.loads(line), "class_line")
    assert geometry.startswith("kind,id,index,x,y")


def test_separated_regime_has_no_parabolic_elements():
    summary, _, _ = hs.build({"t": -0.05, "path": [0]})
    assert summary["parabolic"] == 0


def test_dimension_one_third_model():
    report = hs.dimension(ONE_THIRD)
    validate(report, "dimension")
    assert abs(report["d_s"] - math.log(2) / math.log(3)) < 1e-6
    rows = list(csv.DictReader(io.StringIO(hs.gibbs(ONE_THIRD))))
    # One row per prefix-tree node: leaves plus their ancestors in a full binary tree.
    assert len(rows) == 2 * report["states"] - 2


def test_exponents_closed_form():
    e = hs.exponents(0.55, 0.55)
    validate(e, "exponents")
    # sigma0 = 1 - ds, rho1 = (1 + ds) / 2 - du
    assert e["beta_max"] == pytest.approx(0.45 / 0.325, rel=1e-12)
    assert e["x_cr_exponent"] == pytest.approx(2.0, abs=1e-12)


def test_h4_region_grid():
    rows = list(csv.DictReader(io.StringIO(hs.h4_region(10))))
    assert len(rows) == 100


def test_verify_subset_and_fault_injection():
    small = {"verify": {"points": 2, "parabolic_instances": 2}}
    clean = hs.verify(small, [1, 7])
    validate(clean, "verify_report")
    assert clean["ok"]
    small["verify"]["corrupt"] = "A_y"
    bad = hs.verify(small, [1, 7])
    assert not bad["ok"]
    assert bad["failures"] == ["composition calculus against finite differences"]


def test_worker_count_override():
    hs.set_worker_count(2)
    assert hs.worker_count() == 2
    hs.set_worker_count(0)
    assert hs.worker_count() >= 1
