import configparser
import logging
import os
import re
from typing import Any, Callable, Dict, Optional, Tuple

from cognite.kinetics.data_classes.experiments import EXPERIMENT_KINDS, ExperimentConfig
from cognite.kinetics.exceptions import ConfigError, InvalidArgument

DEFAULT_TOLERANCES = {
    "symmetry_defect": 1e-10,
    "assembly_defect": 1.0,
    "psd": 1e-10,
    "eps_grid": 1e-6,
    "null_space": 1e-8,
    "balance_constant": 50.0,
    "vidav_budget": 1e-3,
    "resolution": 0.5,
    "step_size": 2.5,
    "norm_growth": 1e-10,
    "leakage_warning": 1e-2,
    "radicand": 1e-12,
}


class ClientConfig:
    """Process-level settings of a KineticsClient.

    Values are taken from the keyword arguments, then from the environment variables KINETICS_MAX_WORKERS,
    KINETICS_DEBUG and KINETICS_SEED, then from the defaults.

    Args:
        max_workers (int): Threads used by assembly and mode sweeps.
        debug (bool): Log everything under `cognite.kinetics` at DEBUG to stderr.
        seed (int): Base seed of every random sample drawn by the library.
        tolerances (Dict[str, float]): Overrides of the numerical budgets.
        table_cache_bytes (int): Collision tables are kept in memory when they fit in this many bytes.
    """

    def __init__(
        self,
        max_workers: int = None,
        debug: bool = None,
        seed: int = None,
        tolerances: Dict[str, float] = None,
        table_cache_bytes: int = None,
    ):
        self.max_workers = max_workers or int(os.getenv("KINETICS_MAX_WORKERS", 4))
        if debug is None:
            debug = os.getenv("KINETICS_DEBUG", "0").lower() in ("1", "true", "yes")
        self.debug = debug
        self.seed = seed if seed is not None else int(os.getenv("KINETICS_SEED", 0))
        unknown = set(tolerances or {}) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InvalidArgument("tolerances", f"unknown keys {sorted(unknown)}")
        self.tolerance_overrides = dict(tolerances or {})
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerance_overrides}
        self.table_cache_bytes = table_cache_bytes or 256 * 2 ** 20
        if self.max_workers < 1:
            raise InvalidArgument("max_workers", f"must be at least 1, got {self.max_workers}")
        if self.debug:
            _enable_debug_logging()

    def __str__(self):
        return "%s(max_workers: %d, debug: %s, seed: %d)" % (
            self.__class__.__name__,
            self.max_workers,
            self.debug,
            self.seed,
        )


def _enable_debug_logging():
    log = logging.getLogger("cognite.kinetics")
    if not any(isinstance(h, logging.StreamHandler) for h in log.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
        log.addHandler(handler)
    log.setLevel(logging.DEBUG)


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _odd_at_least_5(n):
    return n >= 5 and n % 2 == 1


def _boolean(value: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# section -> key -> (parser, default, (check, message))
_SCHEMA: Dict[str, Dict[str, Tuple[Callable, Any, Optional[Tuple[Callable, str]]]]] = {
    "experiment": {
        "kind": (str, "linear_decay", (lambda k: k in EXPERIMENT_KINDS, f"must be one of {EXPERIMENT_KINDS}")),
        "seed": (int, 0, (_non_negative, "must be non-negative")),
    },
    "kernel": {
        "kind": (str, "soft", (lambda k: k in ("soft", "hard"), "must be soft or hard")),
        "b": (float, 1.0, None),
        "a": (float, 0.0, None),
        "gamma": (float, 0.0, (lambda g: g > -2, "must be greater than -2")),
        "chi_epsilon": (float, 0.1, (_positive, "must be positive")),
        "g_min": (float, 1e-8, (_positive, "must be positive")),
    },
    "grid": {
        "p_max": (float, 8.0, (_positive, "must be positive")),
        "n_per_axis": (int, 9, (_odd_at_least_5, "must be odd and at least 5")),
        "rule": (str, "trapezoid", (lambda r: r in ("trapezoid", "gauss"), "must be trapezoid or gauss")),
        "sphere_order": (int, 5, (lambda n: 1 <= n <= 41, "must lie in 1..41")),
    },
    "frequencies": {
        "n": (int, 40, (_positive, "must be positive")),
        "k_min": (float, 0.01, (_positive, "must be positive")),
        "k_max": (float, 10.0, (_positive, "must be positive")),
    },
    "time": {
        "t_final": (float, 100.0, (_positive, "must be positive")),
        "dt": (float, 0.05, (_positive, "must be positive")),
        "method": (str, "rk4", (lambda m: m in ("rk4", "eig", "expm"), "must be rk4, eig or expm")),
        "snapshot_every": (int, 20, (_positive, "must be positive")),
    },
    "rate": {
        "r": (float, 1.0, (lambda r: 1 <= r <= 2, "must lie in [1, 2]")),
        "m": (float, 0.0, (_non_negative, "must be non-negative")),
        "ell": (float, 0.0, None),
        "decay_order": (float, 0.0, (_non_negative, "must be non-negative")),
        "fit_t_lo": (float, 10.0, (_non_negative, "must be non-negative")),
        "fit_t_hi": (float, 100.0, (_positive, "must be positive")),
    },
    "nonlinear": {
        "n_line": (int, 4, (_positive, "must be positive")),
        "dk": (float, 0.25, (_positive, "must be positive")),
        "amplitude": (float, 0.0, (_non_negative, "must be non-negative, 0 calibrates by bisection")),
        "n_iters": (int, 6, (lambda n: n >= 2, "must be at least 2")),
        "threshold": (float, 0.1, (_positive, "must be positive")),
        "cadence": (str, "outer", (lambda c: c in ("outer", "stepwise"), "must be outer or stepwise")),
        "n_outer": (int, 4, (_positive, "must be positive")),
    },
    "tolerances": {key: (float, value, (_positive, "must be positive")) for key, value in DEFAULT_TOLERANCES.items()},
    "output": {
        "dir": (str, "out", None),
        "plots": (_boolean, True, None),
    },
}

# kernel hypothesis argument -> config key reporting it
_KERNEL_ARGUMENTS = {"kind": "kind", "b_exponent": "b", "a_exponent": "a", "angular_exponent": "gamma"}

_KEY_RE = re.compile(r"^\s*([^=:\s#;\[][^=:]*?)\s*[=:]")
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_numbers(text: str) -> Dict[Tuple[str, str], int]:
    lines = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            section = match.group(1).strip()
            lines[(section, None)] = number
            continue
        match = _KEY_RE.match(line)
        if match and section is not None:
            lines.setdefault((section, match.group(1).strip().lower()), number)
    return lines


def load_experiment_config(path: str) -> ExperimentConfig:
    """Load and validate an experiment config file.

    Args:
        path (str): Path to the INI-style file.

    Returns:
        ExperimentConfig: The resolved configuration, defaults filled in.

    Raises:
        ConfigError: With the path and 1-based line of the offending entry.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(path, None, f"cannot read config: {e.strerror}")
    return parse_experiment_config(text, path)


def parse_experiment_config(text: str, path: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(path, e.lineno, "entry before the first [section] header")
    except configparser.ParsingError as e:
        line, content = e.errors[0]
        raise ConfigError(path, line, f"cannot parse {content!r}")
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(path, e.lineno, e.message)
    except configparser.Error as e:
        raise ConfigError(path, getattr(e, "lineno", None), e.message)

    lines = _line_numbers(text)
    values = {section: {key: spec[1] for key, spec in keys.items()} for section, keys in _SCHEMA.items()}
    overrides = []
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(path, lines.get((section, None)), f"unknown section [{section}]")
        for key, raw in parser.items(section):
            line = lines.get((section, key))
            if key not in _SCHEMA[section]:
                raise ConfigError(path, line, f"unknown key '{key}' in [{section}]")
            convert, _, check = _SCHEMA[section][key]
            try:
                value = convert(raw)
            except ValueError:
                raise ConfigError(path, line, f"[{section}] {key}: cannot convert {raw!r} to {convert.__name__}")
            if check is not None and not check[0](value):
                raise ConfigError(path, line, f"[{section}] {key} = {raw}: {check[1]}")
            values[section][key] = value
            if section == "tolerances":
                overrides.append(key)

    config = ExperimentConfig(**values, overrides=overrides, source=path)
    try:
        config.kernel_model()
    except InvalidArgument as e:
        key = _KERNEL_ARGUMENTS.get(e.argument, e.argument)
        raise ConfigError(path, lines.get(("kernel", key)), f"[kernel] {key}: {e.message}")
    _check_cross_fields(config, lines, path)
    return config


def _check_cross_fields(config: ExperimentConfig, lines, path):
    if config.frequencies["k_min"] >= config.frequencies["k_max"]:
        raise ConfigError(path, lines.get(("frequencies", "k_min")), "[frequencies] k_min must be below k_max")
    if config.time["dt"] > config.time["t_final"]:
        raise ConfigError(path, lines.get(("time", "dt")), "[time] dt must not exceed t_final")
    if config.rate["fit_t_lo"] >= config.rate["fit_t_hi"]:
        raise ConfigError(path, lines.get(("rate", "fit_t_lo")), "[rate] fit_t_lo must be below fit_t_hi")
    if config.rate["fit_t_hi"] > config.time["t_final"]:
        raise ConfigError(path, lines.get(("rate", "fit_t_hi")), "[rate] fit window ends after t_final")
    if config.kernel["kind"] == "hard" and config.experiment["kind"] in ("nonlinear_slab", "homogeneous_relax"):
        raise ConfigError(
            path, lines.get(("kernel", "kind")), "[kernel] nonlinear experiments are run with soft potentials only"
        )
