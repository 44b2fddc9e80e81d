"""Experiment harness: configs, fading draws, sweeps, CSV tables, CLI."""

import textwrap

import numpy as np
import pytest
from click.testing import CliRunner

from macoff.cli import main
from macoff.model import InvalidParameterError, Scenario
from macoff.simlab import csvio
from macoff.simlab.config import (
    ConfigError,
    ConfigWarning,
    MonteCarloSpec,
    SweepSpec,
    bundled_config_names,
    load_config,
)
from macoff.simlab.experiments import (
    run_montecarlo,
    run_sweep,
    sample_channel,
    trial_rng,
)

SCENARIO_YAML = textwrap.dedent(
    """
    kind: scenario
    power_unit: normalized
    mode: binary
    schemes: [fullma, tdma]
    scenario:
      symbol_interval: 1.0
      noise_ts: 1.0
      user1: {bits: 1.5, latency: 3.0, h_sq: 1.0, power_budget: 6.0}
      user2: {bits: 2.0, latency: 5.0, h_sq: 1.0, power_budget: 6.0}
    """
)


class StubRng:
    def standard_exponential(self):
        return 1.0


class TestChannelDraws:
    def test_unit_draw_recovers_path_loss(self):
        assert sample_channel(1.0, 3.0, StubRng()) == pytest.approx(1.0)
        assert sample_channel(500.0, 3.0, StubRng()) == pytest.approx(8e-9)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(InvalidParameterError):
            sample_channel(0.0, 3.0, StubRng())

    def test_mean_gain_matches_path_loss(self):
        rng = np.random.default_rng(5)
        mean = sum(sample_channel(500.0, 3.0, rng) for _ in range(100000)) / 100000
        assert mean == pytest.approx(8e-9, rel=0.02)

    def test_trial_streams_are_reproducible_and_distinct(self):
        a = trial_rng(42, 3).standard_exponential(4)
        b = trial_rng(42, 3).standard_exponential(4)
        c = trial_rng(42, 4).standard_exponential(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestConfigs:
    def test_bundled_names(self):
        names = bundled_config_names()
        for name in ("fig4", "fig5", "fig6", "fig7-8", "fig9-10"):
            assert name in names

    def test_minimal_scenario(self, tmp_path):
        path = tmp_path / "one.yaml"
        path.write_text(SCENARIO_YAML)
        sc = load_config(path)
        assert isinstance(sc, Scenario)
        assert sc.permutation == (1, 2)
        assert sc.alpha1 == pytest.approx(1.0)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(SCENARIO_YAML.replace("kind: scenario", "kind: scenario\nbogus: 1"))
        with pytest.raises(ConfigError):
            load_config(path)

    def test_reversed_latencies_warn_and_swap(self, tmp_path):
        swapped = SCENARIO_YAML.replace("latency: 3.0", "latency: 7.0")
        path = tmp_path / "swap.yaml"
        path.write_text(swapped)
        with pytest.warns(ConfigWarning):
            sc = load_config(path)
        assert sc.permutation == (2, 1)
        assert sc.user1.latency == 5.0

    def test_bundled_sweep_loads(self):
        spec = load_config("fig4")
        assert isinstance(spec, SweepSpec)
        assert spec.parameter == "h1_sq"
        assert len(spec.values) == 100


class TestSweepAndTables:
    def make_spec(self, tmp_path):
        yaml = SCENARIO_YAML.replace("kind: scenario", "kind: sweep") + textwrap.dedent(
            """
            sweep:
              parameter: h1_sq
              values: [1.0]
            """
        )
        path = tmp_path / "sweep.yaml"
        path.write_text(yaml)
        return load_config(path)

    def test_one_row_per_scheme_and_value(self, tmp_path):
        spec = self.make_spec(tmp_path)
        rows = run_sweep(spec)
        assert len(rows) == 2
        assert {r.scheme for r in rows} == {"fullma", "tdma"}
        assert all(r.mode == "binary" for r in rows)

    def test_csv_round_trip_is_exact(self, tmp_path):
        rows = run_sweep(self.make_spec(tmp_path))
        path = tmp_path / "rows.csv"
        with open(path, "w", newline="") as fh:
            csvio.write_solutions(rows, fh)
        assert csvio.read_solutions(path) == rows

    def test_validate_solutions_accepts_solver_output(self, tmp_path):
        spec = self.make_spec(tmp_path)
        rows = run_sweep(spec)
        scenario_of_row = lambda row: spec.template.build(h1_sq=row.sweep_value)
        assert csvio.validate_solutions(rows, scenario_of_row) == []


class TestMonteCarlo:
    def make_spec(self, tmp_path, equal_gains):
        yaml = SCENARIO_YAML.replace("kind: scenario", "kind: montecarlo").replace(
            "power_unit: normalized", "power_unit: watts"
        ).replace("noise_ts: 1.0", "noise_watts: 1.0e-2") + textwrap.dedent(
            f"""
            montecarlo:
              trials: 2
              seed: 11
              d1: [2.0]
              d2: 2.0
              equal_gains: {str(equal_gains).lower()}
            """
        )
        path = tmp_path / "mc.yaml"
        path.write_text(yaml)
        spec = load_config(path)
        assert isinstance(spec, MonteCarloSpec)
        return spec

    def test_equal_gains_make_tdma_free(self, tmp_path):
        rows = run_montecarlo(self.make_spec(tmp_path, equal_gains=True))
        by_scheme = {r["scheme"]: r for r in rows}
        full, tdma = by_scheme["fullma"], by_scheme["tdma"]
        assert full["feasible_count"] == tdma["feasible_count"] > 0
        assert full["mean_energy_joules"] == pytest.approx(
            tdma["mean_energy_joules"], rel=1e-6
        )

    def test_same_seed_reproduces_aggregates(self, tmp_path):
        spec = self.make_spec(tmp_path, equal_gains=False)
        assert run_montecarlo(spec) == run_montecarlo(spec)


class TestCli:
    def test_solve_json(self, tmp_path):
        path = tmp_path / "one.yaml"
        path.write_text(SCENARIO_YAML)
        result = CliRunner().invoke(
            main, ["solve", "--config", str(path), "--scheme", "fullma", "--json"]
        )
        assert result.exit_code == 0, result.output
        assert '"feasible": true' in result.output.lower()

    def test_sweep_then_validate(self, tmp_path):
        config = tmp_path / "sweep.yaml"
        config.write_text(
            SCENARIO_YAML.replace("kind: scenario", "kind: sweep")
            + "sweep: {parameter: h1_sq, values: [1.0]}\n"
        )
        out = tmp_path / "rows.csv"
        runner = CliRunner()
        result = runner.invoke(main, ["sweep", "--config", str(config), "--output", str(out)])
        assert result.exit_code == 0, result.output
        result = runner.invoke(main, ["validate", str(out), "--config", str(config)])
        assert result.exit_code == 0, result.output
