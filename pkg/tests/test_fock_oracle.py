"""Perturbative elements against a brute-force Dyson series in a truncated cavity Fock space."""
import json
from pathlib import Path

import numpy as np
import pytest

from localpurity.errors import ValidationError
from localpurity.fock_oracle import SCHEMA, OracleSetup, load_golden, run_oracle
from localpurity.harvesting import DetectorSpec, HarvestElements, compute_elements, negativity
from localpurity.thermal import FieldSpec, QuadratureConfig

GOLDEN = Path(__file__).parent / "data" / "fock_cavity_golden.json"


def cavity_elements(setup: OracleSetup, kind: str) -> HarvestElements:
    xa, xb = setup.positions
    common = dict(kind=kind, gap=setup.gap, coupling=setup.coupling,
                  spatial_width=setup.sigma, switch_width=setup.switch_width)
    fld = FieldSpec(dim=1, regulator="cavity", cavity_length=setup.cavity_length)
    return compute_elements(DetectorSpec(center=(xa,), **common), DetectorSpec(center=(xb,), **common), fld,
                            QuadratureConfig(cavity_jmax=setup.n_modes))


def assert_elements_close(got: HarvestElements, ref: dict, tol: float):
    want = HarvestElements.from_mapping(ref)
    scale = max(want.L_AA, abs(want.M))
    assert np.max(np.abs(got.L - want.L)) < tol * scale
    assert abs(got.M - want.M) < tol * scale
    if "K_A" in ref:
        assert abs(got.K_A - want.K_A) < tol * scale
        assert abs(got.K_B - want.K_B) < tol * scale


@pytest.mark.parametrize("kind", ["qubit", "oscillator"])
def test_golden_matches_closed_form(kind):
    data = load_golden(GOLDEN)
    setup = OracleSetup(**data["setup"])
    assert_elements_close(cavity_elements(setup, kind), data["results"][kind], 1e-6)


def test_golden_benchmark_does_not_harvest():
    data = load_golden(GOLDEN)
    el = HarvestElements.from_mapping(data["results"]["qubit"])
    assert abs(el.M) < el.L_AA
    assert negativity(el, 0.0, 0.0) == 0.0


def test_small_oracle_run():
    setup = OracleSetup(n_modes=6, steps=400, separation=4.0, cavity_length=12.0)
    data = run_oracle(setup)
    assert data["schema"] == SCHEMA
    for kind in ("qubit", "oscillator"):
        assert_elements_close(cavity_elements(setup, kind), data["results"][kind], 1e-5)


def test_schema_checked(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 99}))
    with pytest.raises(ValidationError):
        load_golden(bad)


def test_setup_validation():
    with pytest.raises(ValidationError):
        OracleSetup(separation=30.0)
    with pytest.raises(ValidationError):
        OracleSetup(n_modes=0)
