"""Experiment configs: YAML files with explicit units.

A config is one of three kinds:

* ``kind: scenario``   one two-user instance
* ``kind: sweep``      a scenario plus one swept parameter and a value grid
* ``kind: montecarlo`` a scenario template plus distances and fading trials

Latencies and times are seconds, task sizes bits, channel gains are
dimensionless power gains.  Power budgets follow ``power_unit``: ``watts``
reads them as absolute watts, ``normalized`` as multiples of the symbol
interval, so a budget x means x * Ts watts.  Noise is ``noise_watts``
(absolute) or ``noise_ts`` (x * Ts watts); exactly one must be given.

Unknown keys are rejected with the offending path in the message.  A config
whose user 1 has the larger latency is accepted but triggers a
``ConfigWarning``: solvers order users by latency and record the swap in
``Scenario.permutation``.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from importlib import resources

import yaml

from ..model import (
    BINARY,
    FULL_MA,
    ID,
    MODES,
    SCHEMES,
    SDWTS,
    TDMA,
    LocalComputeModel,
    RadioLink,
    Scenario,
    TaskSpec,
    build_scenario,
)

NORMALIZED = "normalized"
WATTS = "watts"

SWEEP_PARAMETERS = (
    "h1_sq",
    "h2_sq",
    "L1",
    "L2",
    "B1",
    "B2",
    "Pbar1",
    "Pbar2",
    "distance1",
)


class ConfigError(ValueError):
    """A config file failed validation; the message names the field."""


class ConfigWarning(UserWarning):
    """Non-fatal config oddity, e.g. users given in reverse latency order."""


def _mapping(raw, where: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(raw).__name__}")
    return raw


def _reject_unknown(raw: dict, allowed, where: str) -> None:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}")


def _number(raw: dict, key: str, where: str, *, default=None, required=False, positive=False, nonnegative=False):
    if key not in raw or raw[key] is None:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    value = raw[key]
    # YAML booleans are ints in Python; they are never valid quantities here
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    value = float(value)
    if positive and value <= 0.0:
        raise ConfigError(f"{where}.{key}: must be positive, got {value}")
    if nonnegative and value < 0.0:
        raise ConfigError(f"{where}.{key}: must be nonnegative, got {value}")
    return value


def _integer(raw: dict, key: str, where: str, *, default=None, required=False, minimum=None):
    if key not in raw or raw[key] is None:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}, got {value}")
    return value


def _flag(raw: dict, key: str, where: str, default: bool) -> bool:
    if key not in raw or raw[key] is None:
        return default
    value = raw[key]
    if not isinstance(value, bool):
        raise ConfigError(f"{where}.{key}: expected true or false, got {value!r}")
    return value


@dataclass(frozen=True)
class UserTemplate:
    """One user's task and link values in config units."""

    bits: float
    latency: float
    power_budget: float
    h_sq: float | None = None
    exec_time: float = 0.0
    downlink_time: float = 0.0
    chip_constant: float | None = None
    cloud_time_per_bit: float = 0.0
    local_energy_joules: float | None = None


@dataclass(frozen=True)
class ScenarioTemplate:
    """A scenario with possibly-open channel gains.

    ``build`` resolves overrides (swept values or sampled gains), converts
    powers to watts and returns a latency-ordered ``Scenario``.
    """

    symbol_interval: float
    noise: float
    power_unit: str
    user1: UserTemplate
    user2: UserTemplate
    exponent: float = 3.0

    def build(self, **overrides) -> Scenario:
        h1, h2 = self.user1.h_sq, self.user2.h_sq
        l1, l2 = self.user1.latency, self.user2.latency
        b1, b2 = self.user1.bits, self.user2.bits
        pb1, pb2 = self.user1.power_budget, self.user2.power_budget
        for key, value in overrides.items():
            if key == "h1_sq":
                h1 = value
            elif key == "h2_sq":
                h2 = value
            elif key == "L1":
                l1 = value
            elif key == "L2":
                l2 = value
            elif key == "B1":
                b1 = value
            elif key == "B2":
                b2 = value
            elif key == "Pbar1":
                pb1 = value
            elif key == "Pbar2":
                pb2 = value
            elif key == "distance1":
                if value <= 0.0:
                    raise ConfigError(f"distance1 must be positive, got {value}")
                h1 = value**-self.exponent
            else:
                raise ConfigError(f"unknown scenario override {key!r}")
        if h1 is None or h2 is None:
            raise ConfigError("channel gains unset: give h_sq or override h1_sq/h2_sq")
        scale = self.symbol_interval if self.power_unit == NORMALIZED else 1.0
        return build_scenario(
            _task(self.user1, b1, l1, self.symbol_interval),
            _task(self.user2, b2, l2, self.symbol_interval),
            RadioLink(h1, pb1 * scale),
            RadioLink(h2, pb2 * scale),
            noise=self.noise,
            symbol_interval=self.symbol_interval,
        )


def _task(u: UserTemplate, bits: float, latency: float, ts: float) -> TaskSpec:
    model = None
    if u.chip_constant is not None:
        model = LocalComputeModel(u.chip_constant, u.cloud_time_per_bit)
    local = None if u.local_energy_joules is None else u.local_energy_joules / ts
    return TaskSpec(
        bits=bits,
        latency=latency,
        exec_time=u.exec_time,
        downlink_time=u.downlink_time,
        local_energy=local,
        local_model=model,
    )


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a fixed scenario, solved per scheme and mode."""

    template: ScenarioTemplate
    parameter: str
    values: tuple[float, ...]
    schemes: tuple[str, ...]
    modes: tuple[str, ...]
    which_user_binary: int = 1

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"sweep.parameter: {self.parameter!r} is not one of {SWEEP_PARAMETERS}"
            )
        if not self.values:
            raise ConfigError("sweep.values: empty value grid")
        for v in self.values:
            if v <= 0.0:
                raise ConfigError(f"sweep.values: {self.parameter} must be positive, got {v}")
        _check_scheme_modes(self.schemes, self.modes, self.which_user_binary)


@dataclass(frozen=True)
class MonteCarloSpec:
    """Rayleigh-fading trials at given user distances.

    Gains are d**-exponent times a standard-exponential draw (unit Rayleigh
    amplitude scale; the paper states no scale).  ``d1`` may hold several
    distances; each is run with the same seed so trial k reuses the same
    fading draws at every distance.  ``equal_gains`` copies user 1's sampled
    gain onto user 2.
    """

    template: ScenarioTemplate
    trials: int
    seed: int
    d1: tuple[float, ...]
    d2: float
    schemes: tuple[str, ...]
    modes: tuple[str, ...]
    exponent: float = 3.0
    feasibility_filter: bool = True
    equal_gains: bool = False
    which_user_binary: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"montecarlo.trials: must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"montecarlo.seed: must fit in 64 bits, got {self.seed}")
        if self.exponent <= 0.0:
            raise ConfigError(f"montecarlo.exponent: must be positive, got {self.exponent}")
        if not self.d1:
            raise ConfigError("montecarlo.d1: empty distance list")
        for d in self.d1 + (self.d2,):
            if d <= 0.0:
                raise ConfigError(f"montecarlo distances must be positive, got {d}")
        _check_scheme_modes(self.schemes, self.modes, self.which_user_binary)


def _check_scheme_modes(schemes, modes, which_user_binary) -> None:
    if not schemes:
        raise ConfigError("schemes: empty list")
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"schemes: unknown scheme {s!r}")
    if not modes:
        raise ConfigError("mode: empty list")
    for m in modes:
        if m not in MODES:
            raise ConfigError(f"mode: unknown mode {m!r}")
        if m != BINARY:
            for s in schemes:
                if s in (SDWTS, ID):
                    raise ConfigError(
                        f"mode {m!r} supports fullma and tdma only, config asks for {s!r}"
                    )
    if which_user_binary not in (1, 2):
        raise ConfigError(f"which_user_binary: must be 1 or 2, got {which_user_binary}")


_TOP_KEYS = (
    "kind",
    "description",
    "power_unit",
    "channel",
    "scenario",
    "sweep",
    "montecarlo",
    "schemes",
    "mode",
    "which_user_binary",
)
_SCENARIO_KEYS = ("symbol_interval", "noise_watts", "noise_ts", "user1", "user2")
_USER_KEYS = (
    "bits",
    "latency",
    "power_budget",
    "h_sq",
    "exec_time",
    "downlink_time",
    "local",
    "local_energy_joules",
)
_SWEEP_KEYS = ("parameter", "values", "start", "stop", "steps")
_MC_KEYS = ("trials", "seed", "exponent", "d1", "d2", "feasibility_filter", "equal_gains")


def _parse_user(raw, where: str) -> UserTemplate:
    raw = _mapping(raw, where)
    _reject_unknown(raw, _USER_KEYS, where)
    chip = None
    cloud = 0.0
    if "local" in raw and raw["local"] is not None:
        local = _mapping(raw["local"], f"{where}.local")
        _reject_unknown(local, ("chip_constant", "cloud_time_per_bit"), f"{where}.local")
        chip = _number(local, "chip_constant", f"{where}.local", required=True, positive=True)
        cloud = _number(local, "cloud_time_per_bit", f"{where}.local", default=0.0, nonnegative=True)
    return UserTemplate(
        bits=_number(raw, "bits", where, required=True, positive=True),
        latency=_number(raw, "latency", where, required=True, positive=True),
        power_budget=_number(raw, "power_budget", where, required=True, positive=True),
        h_sq=_number(raw, "h_sq", where, positive=True),
        exec_time=_number(raw, "exec_time", where, default=0.0, nonnegative=True),
        downlink_time=_number(raw, "downlink_time", where, default=0.0, nonnegative=True),
        chip_constant=chip,
        cloud_time_per_bit=cloud,
        local_energy_joules=_number(raw, "local_energy_joules", where, nonnegative=True),
    )


def _parse_template(raw: dict, power_unit: str, exponent: float) -> ScenarioTemplate:
    sc = _mapping(raw.get("scenario"), "scenario")
    _reject_unknown(sc, _SCENARIO_KEYS, "scenario")
    ts = _number(sc, "symbol_interval", "scenario", required=True, positive=True)
    watts = _number(sc, "noise_watts", "scenario", positive=True)
    per_ts = _number(sc, "noise_ts", "scenario", positive=True)
    if (watts is None) == (per_ts is None):
        raise ConfigError("scenario: give exactly one of noise_watts or noise_ts")
    noise = watts if watts is not None else per_ts * ts
    user1 = _parse_user(sc.get("user1"), "scenario.user1")
    user2 = _parse_user(sc.get("user2"), "scenario.user2")
    if user1.latency > user2.latency:
        warnings.warn(
            "scenario.user1 has the larger latency; solvers reorder users and "
            "report the swap in Scenario.permutation",
            ConfigWarning,
            stacklevel=3,
        )
    return ScenarioTemplate(
        symbol_interval=ts,
        noise=noise,
        power_unit=power_unit,
        user1=user1,
        user2=user2,
        exponent=exponent,
    )


def _parse_values(raw: dict) -> tuple[float, ...]:
    has_list = raw.get("values") is not None
    has_range = any(raw.get(k) is not None for k in ("start", "stop", "steps"))
    if has_list == has_range:
        raise ConfigError("sweep: give either values or start/stop/steps")
    if has_list:
        values = raw["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values: expected a non-empty list")
        out = []
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"sweep.values[{i}]: expected a number, got {v!r}")
            out.append(float(v))
        return tuple(out)
    start = _number(raw, "start", "sweep", required=True)
    stop = _number(raw, "stop", "sweep", required=True)
    steps = _integer(raw, "steps", "sweep", required=True, minimum=1)
    if steps == 1:
        return (start,)
    return tuple(start + i * (stop - start) / (steps - 1) for i in range(steps))


def _parse_modes(raw: dict) -> tuple[str, ...]:
    mode = raw.get("mode", BINARY)
    if isinstance(mode, str):
        return (mode,)
    if isinstance(mode, list) and all(isinstance(m, str) for m in mode):
        return tuple(mode)
    raise ConfigError(f"mode: expected a mode name or list of names, got {mode!r}")


def _parse_schemes(raw: dict, modes) -> tuple[str, ...]:
    schemes = raw.get("schemes")
    if schemes is None:
        # anything outside binary only has fullma/tdma solvers
        if all(m == BINARY for m in modes):
            return SCHEMES
        return (FULL_MA, TDMA)
    if not isinstance(schemes, list) or not all(isinstance(s, str) for s in schemes):
        raise ConfigError(f"schemes: expected a list of scheme names, got {schemes!r}")
    return tuple(schemes)


def bundled_config_names() -> tuple[str, ...]:
    """Names accepted by load_config in place of a file path."""
    files = resources.files("macoff.simlab") / "configs"
    return tuple(sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml")))


def _read_text(path) -> str:
    path = os.fspath(path)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    if os.path.basename(path) == path:
        name = path[:-5] if path.endswith(".yaml") else path
        candidate = resources.files("macoff.simlab") / "configs" / f"{name}.yaml"
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
        raise ConfigError(
            f"no such config file or bundled name {path!r}; "
            f"bundled: {', '.join(bundled_config_names())}"
        )
    raise ConfigError(f"no such config file: {path!r}")


def load_config(path):
    """Parse a config file (or bundled config name).

    Returns a ``Scenario`` for kind scenario, a ``SweepSpec`` for kind sweep
    or a ``MonteCarloSpec`` for kind montecarlo.
    """
    try:
        raw = yaml.safe_load(_read_text(path))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    raw = _mapping(raw, "config")
    _reject_unknown(raw, _TOP_KEYS, "config")

    kind = raw.get("kind", "scenario")
    if kind not in ("scenario", "sweep", "montecarlo"):
        raise ConfigError(f"kind: expected scenario, sweep or montecarlo, got {kind!r}")
    power_unit = raw.get("power_unit", WATTS)
    if power_unit not in (NORMALIZED, WATTS):
        raise ConfigError(f"power_unit: expected normalized or watts, got {power_unit!r}")
    exponent = 3.0
    if "channel" in raw and raw["channel"] is not None:
        channel = _mapping(raw["channel"], "channel")
        _reject_unknown(channel, ("exponent",), "channel")
        exponent = _number(channel, "exponent", "channel", default=3.0, positive=True)
    template = _parse_template(raw, power_unit, exponent)
    modes = _parse_modes(raw)
    schemes = _parse_schemes(raw, modes)
    which = _integer(raw, "which_user_binary", "config", default=1)

    if kind == "scenario":
        for key in ("sweep", "montecarlo"):
            if raw.get(key) is not None:
                raise ConfigError(f"config: {key!r} block is only valid with kind: {key}")
        return template.build()

    if kind == "sweep":
        if raw.get("montecarlo") is not None:
            raise ConfigError("config: 'montecarlo' block is only valid with kind: montecarlo")
        sweep = _mapping(raw.get("sweep"), "sweep")
        _reject_unknown(sweep, _SWEEP_KEYS, "sweep")
        parameter = sweep.get("parameter")
        if not isinstance(parameter, str):
            raise ConfigError(f"sweep.parameter: expected a name, got {parameter!r}")
        return SweepSpec(
            template=template,
            parameter=parameter,
            values=_parse_values(sweep),
            schemes=schemes,
            modes=modes,
            which_user_binary=which,
        )

    if raw.get("sweep") is not None:
        raise ConfigError("config: 'sweep' block is only valid with kind: sweep")
    mc = _mapping(raw.get("montecarlo"), "montecarlo")
    _reject_unknown(mc, _MC_KEYS, "montecarlo")
    d1 = mc.get("d1")
    if isinstance(d1, list):
        distances = []
        for i, d in enumerate(d1):
            if isinstance(d, bool) or not isinstance(d, (int, float)):
                raise ConfigError(f"montecarlo.d1[{i}]: expected a number, got {d!r}")
            distances.append(float(d))
        d1 = tuple(distances)
    else:
        d1 = (_number(mc, "d1", "montecarlo", required=True, positive=True),)
    return MonteCarloSpec(
        template=template,
        trials=_integer(mc, "trials", "montecarlo", required=True, minimum=1),
        seed=_integer(mc, "seed", "montecarlo", required=True, minimum=0),
        d1=d1,
        d2=_number(mc, "d2", "montecarlo", required=True, positive=True),
        schemes=schemes,
        modes=modes,
        exponent=_number(mc, "exponent", "montecarlo", default=3.0, positive=True),
        feasibility_filter=_flag(mc, "feasibility_filter", "montecarlo", True),
        equal_gains=_flag(mc, "equal_gains", "montecarlo", False),
        which_user_binary=which,
    )
