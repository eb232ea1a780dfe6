import json
import math
import pathlib

import jsonschema
import numpy as np
import pytest
from referencing import Registry, Resource

dfatoms = pytest.importorskip("dfatoms")

DOCS = pathlib.Path(__file__).resolve().parents[2] / "docs"
CONFIG_SCHEMA = json.loads((DOCS / "config.schema.json").read_text())
REPORT_SCHEMA = json.loads((DOCS / "report.schema.json").read_text())
REGISTRY = Registry().with_resource(CONFIG_SCHEMA["$id"], Resource.from_contents(CONFIG_SCHEMA))

HELIUM = {
    "Z": 2,
    "shells": [{"n": 1, "kappa": -1, "w": 2}],
    "nr_shells": [{"n": 1, "l": 0, "w": 2}],
    "grid": {"M": 60},
    "c_factors": [1, 2],
}


def validate_report(report):
    jsonschema.Draft202012Validator(REPORT_SCHEMA, registry=REGISTRY).validate(report)


def test_closed_form_levels():
    assert abs(dfatoms.oracle_sommerfeld_shifted(1, -1, 1) + 0.5000066566) < 1e-9
    assert abs(dfatoms.oracle_sommerfeld_shifted(92, -1, 1) + 4861.198) < 1e-3
    c = dfatoms.SPEED_OF_LIGHT
    assert math.isclose(dfatoms.oracle_sommerfeld(1, -1, 1), c * c - 0.5000066566, rel_tol=1e-15)


def test_supercritical_raises_with_code():
    with pytest.raises(dfatoms.DfAtomsError) as info:
        dfatoms.oracle_sommerfeld(140, -1, 1)
    assert info.value.code == "domain_error"


def test_conditions():
    assert dfatoms.validate_conditions(124, 41)["all_hold"]
    assert not dfatoms.validate_conditions(130, 2)["flags"]["theorem1"]
    with pytest.raises(dfatoms.DfAtomsError) as info:
        dfatoms.validate_conditions(2, 3)
    assert info.value.code == "invalid_config"


def test_solve_helium():
    r = dfatoms.solve(2, [(1, -1, 2)], grid_size=300)
    assert r["converged"]
    assert -2.87 < r["energy_shifted"] < -2.85
    orb = r["orbitals"][0]
    assert orb["P"].shape == r["r"].shape
    assert orb["Q"].shape == r["r_mid"].shape
    c2 = dfatoms.SPEED_OF_LIGHT ** 2
    assert 0 < orb["energy_shifted"] + c2 < c2
    # the large component carries almost all of the charge
    assert np.trapezoid(orb["P"] ** 2, r["r"]) == pytest.approx(1.0, abs=1e-3)


def test_full_config_matches_schema():
    cfg = dfatoms.full_config(HELIUM)
    assert cfg["schema"] == dfatoms.CONFIG_SCHEMA
    jsonschema.Draft202012Validator(CONFIG_SCHEMA).validate(cfg)
    assert dfatoms.full_config(cfg) == cfg


@pytest.mark.parametrize(
    "mode",
    ["solve", "hf", "limit-study", "projected", "maxmin", "fock-min", "projector-iteration", "conditions"],
)
def test_reports_match_schema(mode):
    report = dfatoms.run(dict(HELIUM, mode=mode))
    validate_report(report)
    assert report["format"] == dfatoms.REPORT_FORMAT
    assert report["status"] == "ok"


def test_oracle_report():
    report = dfatoms.run({"mode": "oracle-sommerfeld", "Z": 92, "kappa": -1, "n": 1})
    validate_report(report)
    assert "hypotheses" not in report
    assert abs(report["results"]["energy_shifted"] + 4861.198) < 1e-3


def test_error_report():
    report = dfatoms.run({"mode": "oracle-sommerfeld", "Z": 140, "kappa": -1, "n": 1})
    validate_report(report)
    assert report["status"] == "error"
    assert report["error"]["code"] == "domain_error"


def test_bad_config_raises():
    with pytest.raises(dfatoms.DfAtomsError, match="occupation must equal"):
        dfatoms.run({"Z": 2, "shells": [{"n": 1, "kappa": -1, "w": 3}]})
    with pytest.raises(dfatoms.DfAtomsError, match="/grid/rmax"):
        dfatoms.run(dict(HELIUM, grid={"rmax": 3}))


def test_schema_rejects_unknown_keys():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(dict(HELIUM, gird={}), CONFIG_SCHEMA)
