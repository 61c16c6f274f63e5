"""Run configuration: JSON in, validated dataclass out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .params import DeformationParams
from .realization import RealizationSpec
from .scalar import as_rational

__all__ = ["ConfigError", "RunConfig", "load_config"]

DEFAULT_TOLERANCES = {"ode": 1e-9, "newton": 1e-12, "float_match": 1e-10}


class ConfigError(ValueError):
    """Invalid configuration; reported with exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    n: int
    a: tuple
    s: str = "0"
    f: object = "sqrt"
    trunc: int = 8
    max_degree: int = 6
    order: int = 6
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {"n", "a", "s", "f", "trunc", "max_degree", "order", "seed", "tolerances"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "n" not in data:
            raise ConfigError("config needs 'n'")
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {n!r}")
        a = data.get("a", ["0"] * n)
        if not isinstance(a, list) or len(a) != n:
            raise ConfigError(f"a must be a list of {n} rational strings")
        for x in list(a) + [data.get("s", "0")]:
            _check_rational(x)
        f = data.get("f", "sqrt")
        if isinstance(f, dict):
            series = f.get("series")
            if set(f) != {"series"} or not isinstance(series, list) or not series:
                raise ConfigError("custom f must be {\"series\": [rational strings]}")
            for c in series:
                _check_rational(c)
            if as_rational(series[0]) != 1:
                raise ConfigError("custom f series must start with 1")
            f = {"series": list(series)}
        elif f not in ("sqrt", "one"):
            raise ConfigError(f"f must be 'sqrt', 'one' or {{\"series\": [...]}}, got {f!r}")
        ints = {}
        for key, default, low in (("trunc", 8, 2), ("max_degree", 6, 0), ("order", 6, 2), ("seed", 0, 0)):
            v = data.get(key, default)
            if not isinstance(v, int) or isinstance(v, bool) or v < low:
                raise ConfigError(f"{key} must be an integer >= {low}, got {v!r}")
            ints[key] = v
        if ints["trunc"] < ints["max_degree"]:
            raise ConfigError("trunc must be at least max_degree")
        tol = dict(DEFAULT_TOLERANCES)
        given = data.get("tolerances", {})
        if not isinstance(given, dict) or set(given) - set(DEFAULT_TOLERANCES):
            raise ConfigError(f"tolerances keys must be among {sorted(DEFAULT_TOLERANCES)}")
        for key, v in given.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"tolerance {key} must be a positive number")
            tol[key] = float(v)
        return cls(n, tuple(a), data.get("s", "0"), f, tolerances=tol, **ints)

    @property
    def params(self) -> DeformationParams:
        return DeformationParams.from_strings(self.n, self.a, self.s)

    def realization_spec(self, trunc: int = None) -> RealizationSpec:
        N = self.trunc if trunc is None else trunc
        if self.f == "sqrt":
            return RealizationSpec(self.params, "sqrt_one_minus_B", trunc=N)
        if self.f == "one":
            return RealizationSpec(self.params, "unity", trunc=N)
        return RealizationSpec(self.params, "custom", tuple(self.f["series"]), trunc=N)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "a": list(self.a),
            "s": self.s,
            "f": self.f,
            "trunc": self.trunc,
            "max_degree": self.max_degree,
            "order": self.order,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
        }


def _check_rational(x):
    if not isinstance(x, str):
        raise ConfigError(f"rationals must be given as strings, got {x!r}")
    try:
        as_rational(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid rational {x!r}") from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)
