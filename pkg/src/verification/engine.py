"""
Verification Engine
Loads configuration, sets up logging, runs the selected suites and writes
the JSON/CSV report. Exit codes: 0 all checks pass, 1 a check failed,
2 the configuration is malformed.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
import yaml

from src.errors import ConfigError
from src.verification.suites import (
    DEFAULT_TOLERANCES, SUITE_CLASSES, SUITE_NAMES, CheckResult, CounterexampleSuite, SuiteManager,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

DEFAULT_CONFIG_PATH = "config/verification_config.yaml"
REPORT_FORMATS = ("json", "csv")

DEFAULTS: Dict[str, Any] = {
    "verification": {"seed": 42, "trials": 10000, "workers": 1, "progress": False},
    "logging": {"enabled": True, "level": "INFO"},
    "export": {"out": None, "format": "json"},
    "tolerances": {},
    "suites": {
        "extension": {"enabled": True, "trials": None, "max_atoms": 5, "max_dim": 4,
                      "exponents": [1, 2, "inf"], "norm_samples": 4,
                      "corrupt_entry": None, "corrupt_delta": 1e-3},
        "sqfn": {"enabled": True, "trials": None, "max_dim": 6, "K_G_bound": 1.782214,
                 "mz_pairs": [[1, 2], [2, 1], [2, 2], [4, 2]], "hilbert_dim": 3,
                 "ascent_starts": 16},
        "condexp": {"enabled": True, "trials": None, "weights": None, "blocks": None,
                    "coarser": None, "Y": None, "exponents": [1, 2, "inf"]},
        "counterexample": {"enabled": True, "N": 10000, "K": 100,
                           "N_sweep": [200, 1000, 5000, 10000], "shift_sequences": 1000,
                           "predual_dim": 3},
        "norms": {"enabled": True, "trials": None},
    },
}

# keys whose default is None but which still must hold a particular kind of value
_NULLABLE_TYPES = {
    "suites.extension.trials": int, "suites.sqfn.trials": int, "suites.condexp.trials": int,
    "suites.norms.trials": int, "suites.extension.corrupt_entry": list,
    "suites.condexp.weights": list, "suites.condexp.blocks": list, "suites.condexp.coarser": list,
    "suites.condexp.Y": dict, "export.out": str,
}


@dataclass
class VerificationConfig:
    """Configuration for a verification run"""
    seed: int = 42
    trials: int = 10000
    workers: int = 1
    progress: bool = False
    enable_logging: bool = True
    log_level: str = "INFO"
    out: Optional[str] = None
    format: str = "json"
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    suites: Dict[str, Dict[str, Any]] = field(
        default_factory=lambda: copy.deepcopy(DEFAULTS["suites"]))


def _type_name(kind) -> str:
    return {bool: "a boolean", int: "an integer", float: "a number", str: "a string",
            list: "a list", dict: "a mapping"}.get(kind, kind.__name__)


def _check_value(key: str, value: Any, default: Any):
    if value is None:
        return
    if default is None:
        kind = _NULLABLE_TYPES.get(key)
        if kind is not None and not (isinstance(value, kind) and not isinstance(value, bool)):
            raise ConfigError(key, f"expected {_type_name(kind)}, got {value!r}")
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(key, f"expected {_type_name(type(default))}, got {value!r}")


def _merge(defaults: Dict[str, Any], overrides: Any, prefix: str) -> Dict[str, Any]:
    """Deep-merge overrides into defaults, rejecting unknown keys and wrong types"""
    if not isinstance(overrides, dict):
        raise ConfigError(prefix or "config", f"expected a mapping, got {overrides!r}")
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        dotted = f"{prefix}.{key}" if prefix else str(key)
        if key not in defaults:
            raise ConfigError(dotted, "unknown configuration key")
        default = defaults[key]
        if isinstance(default, dict) and default and value is not None:
            merged[key] = _merge(default, value, dotted)
        else:
            _check_value(dotted, value, default)
            merged[key] = value if value is not None or default is None else default
    return merged


def config_from_dict(data: Optional[Dict[str, Any]]) -> VerificationConfig:
    """Validate a raw configuration mapping into a VerificationConfig"""
    merged = _merge(DEFAULTS, data or {}, "")
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in merged["tolerances"].items():
        dotted = f"tolerances.{key}"
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(dotted, "unknown tolerance")
        _check_value(dotted, value, 0.0)
        tolerances[key] = float(value)

    verification = merged["verification"]
    if verification["trials"] < 1:
        raise ConfigError("verification.trials", "must be at least 1")
    if verification["workers"] < 1:
        raise ConfigError("verification.workers", "must be at least 1")
    level = str(merged["logging"]["level"]).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError("logging.level", f"unknown log level {level!r}")
    fmt = merged["export"]["format"]
    if fmt not in REPORT_FORMATS:
        raise ConfigError("export.format", f"expected one of {REPORT_FORMATS}, got {fmt!r}")

    return VerificationConfig(
        seed=verification["seed"],
        trials=verification["trials"],
        workers=verification["workers"],
        progress=verification["progress"],
        enable_logging=merged["logging"]["enabled"],
        log_level=level,
        out=merged["export"]["out"],
        format=fmt,
        tolerances=tolerances,
        suites=merged["suites"],
    )


def load_config(config_path: Optional[str] = None) -> VerificationConfig:
    """Load configuration from a YAML (or JSON) file"""
    explicit = config_path or os.environ.get("EXTVERIFY_CONFIG")
    path = explicit or DEFAULT_CONFIG_PATH
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        if explicit:
            raise ConfigError("config", f"file {path} not found")
        # the default file is optional
        data = {}
    except yaml.YAMLError as error:
        raise ConfigError("config", f"cannot parse {path}: {error}")
    config = config_from_dict(data)
    level = os.environ.get("EXTVERIFY_LOG_LEVEL")
    if level:
        if not isinstance(logging.getLevelName(level.upper()), int):
            raise ConfigError("EXTVERIFY_LOG_LEVEL", f"unknown log level {level!r}")
        config.log_level = level.upper()
    return config


class VerificationEngine:
    """Runs verification suites and assembles the report"""

    def __init__(self, config: VerificationConfig):
        self.config = config
        self.manager = SuiteManager()
        self.report: Dict[str, Any] = {}
        self._setup_logging()
        self._create_suites()

    def _setup_logging(self):
        """Setup logging for the verification run"""
        if self.config.enable_logging:
            logging.basicConfig(
                level=getattr(logging, self.config.log_level),
                format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            self.logger = logging.getLogger("ExtensionVerify")
            logging.getLogger("src").setLevel(getattr(logging, self.config.log_level))
        else:
            self.logger = logging.getLogger("ExtensionVerify")
            self.logger.disabled = True

    def _create_suites(self):
        for name in SUITE_NAMES:
            suite = SUITE_CLASSES[name](self.config.suites[name], self.config.tolerances,
                                        self.config.seed, self.config.trials,
                                        self.config.workers, self.config.progress)
            self.manager.add_suite(suite)

    def run(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """Run the named suites (all when None) and return the report"""
        unknown = [name for name in names or [] if name not in SUITE_NAMES]
        if unknown:
            raise ConfigError("suites", f"unknown suites {unknown}")
        self.logger.info(f"Starting verification with seed {self.config.seed}, "
                         f"{self.config.trials} trials")
        results = self.manager.run(names)
        summary = self.manager.get_suite_report()
        self.report = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seed": self.config.seed,
            "trials": self.config.trials,
            **summary,
        }
        self.logger.info(f"Verification completed: {len(results)} checks, "
                         f"{len(summary['failures'])} failures")
        return self.report

    @property
    def results(self) -> List[CheckResult]:
        return self.manager.results

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.report.get("pass", False) else EXIT_CHECK_FAILED

    def diagnostics(self) -> List[Dict[str, Any]]:
        suite = self.manager.suites.get("counterexample")
        return suite.diagnostics if isinstance(suite, CounterexampleSuite) else []

    def export_results(self, filename: str, fmt: str = "json"):
        """Export the report to a JSON file or CSV table"""
        write_report(self.report, filename, fmt)
        self.logger.info(f"Results exported to {filename}")


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str)


def write_report(report: Dict[str, Any], filename: str, fmt: str = "json"):
    if fmt == "csv":
        rows = []
        for row in report.get("checks", []):
            flat = {key: value for key, value in row.items() if key != "witness"}
            if "witness" in row:
                flat["witness"] = json.dumps(row["witness"], sort_keys=True)
            rows.append(flat)
        pd.DataFrame(rows).to_csv(filename, index=False)
    else:
        with open(filename, "w") as f:
            f.write(dumps_report(report))
