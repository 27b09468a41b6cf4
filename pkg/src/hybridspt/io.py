"""Config loading and deterministic CSV/JSON output."""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import numbers
from dataclasses import dataclass

from .errors import ConfigError

SCHEMA_VERSION = 1


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    t = text.strip().lower()
    return None if t in ("", "none") else float(t)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.replace(" ", "").split(",") if p)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.replace(" ", "").split(",") if p)


def _panels(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        a, x = item.split(":")
        out.append((float(a), float(x)))
    if not out:
        raise ValueError("no panels given")
    return tuple(out)


def _choice(*allowed):
    def parse(text):
        t = text.strip()
        if t not in allowed:
            raise ValueError(f"expected one of {allowed}, got {t!r}")
        return t
    return parse


@dataclass(frozen=True)
class Key:
    parse: object
    default: object


SCHEMA: dict[str, dict[str, Key]] = {
    "model": {
        "alpha": Key(float, 0.0),
        "xi_ratio": Key(float, 0.0),
        "gtilde_c": Key(_opt_float, None),
        "gtilde_c_s": Key(_opt_float, None),
        "Omega_over_omega_s": Key(_opt_float, None),
        "Omega_over_omega_b": Key(_opt_float, None),
    },
    "sweep": {
        "variable": Key(_choice("gtilde_c", "gtilde_c_s", "xi_ratio"), "gtilde_c"),
        "min": Key(float, 0.5),
        "max": Key(float, 1.5),
        "count": Key(int, 51),
    },
    "phase_diagram": {
        "xi_min": Key(float, 0.0),
        "xi_max": Key(float, 0.3),
        "xi_count": Key(int, 7),
        "x_min": Key(float, 0.5),
        "x_max": Key(float, 1.5),
        "x_count": Key(int, 11),
        "alpha_low": Key(float, 0.0),
        "alpha_high": Key(float, 1.5),
        "xi_split": Key(float, 0.25),
        "Omega_over_omega_s": Key(float, 1e3),
    },
    "squeezing": {
        "panels": Key(_panels, ((0.0, 0.0), (0.0, 0.245), (1.5, 0.0), (1.5, 0.26))),
        "Omega_over_omega_b": Key(float, 1e3),
        "count": Key(int, 21),
        "half_width": Key(_opt_float, None),
        "perfect_fraction": Key(float, 0.1),
    },
    "elimination": {
        "ratios": Key(_float_list, (0.0, 0.01, 0.02, 0.04, 0.08)),
        "delta_over_omega_b": Key(float, 20.0),
        "Omega_over_omega_b": Key(float, 2.0),
        "gtilde_c": Key(float, 0.5),
        "alpha": Key(float, 0.0),
        "cutoff_a": Key(int, 20),
        "cutoff_b": Key(int, 200),
    },
    "numerics": {
        "tol": Key(float, 1e-6),
        "cutoff_max": Key(int, 16384),
        "initial_cutoff": Key(int, 30),
        "growth": Key(float, 1.5),
        "k": Key(int, 4),
        "predisplace": Key(_choice("auto", "true", "false"), "auto"),
        "predisplace_min_beta2": Key(float, 25.0),
        "frame": Key(_choice("squeezed", "lab"), "squeezed"),
        "orders": Key(_int_list, (2, 4, 6, 8)),
        "dense_threshold": Key(int, 4096),
        "degeneracy_tol": Key(float, 1e-3),
        "monitor": Key(_choice("auto", "n_mean", "variance_P", "energy"), "auto"),
        "timing": Key(_bool, False),
    },
    "run": {
        "workers": Key(int, 0),
        "format": Key(_choice("csv", "json"), "csv"),
    },
}


def parse_value(section: str, key: str, text: str):
    try:
        spec = SCHEMA[section][key]
    except KeyError:
        raise ConfigError(f"unknown config key {section}.{key}", key=f"{section}.{key}") from None
    try:
        return spec.parse(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {section}.{key}: {exc}", key=f"{section}.{key}") from None


def load_config(path: str | None = None, overrides: dict[str, str] | None = None) -> dict[str, dict]:
    """Defaults, then the INI file at ``path``, then ``{"section.key": text}`` overrides."""
    cfg = {sec: {k: spec.default for k, spec in keys.items()} for sec, keys in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for sec in parser.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown config section [{sec}]", key=sec)
            for key, text in parser.items(sec):
                cfg[sec][key] = parse_value(sec, key, text)
    for dotted, text in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if sec not in SCHEMA:
            raise ConfigError(f"unknown config section [{sec}]", key=dotted)
        cfg[sec][key] = parse_value(sec, key, text)
    return cfg


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (tuple, list)):
        return ",".join(format_value(x) if not isinstance(x, tuple) else ":".join(map(format_value, x))
                        for x in v)
    return str(v)


def config_lines(cfg: dict) -> list[str]:
    out = []
    for sec in SCHEMA:
        for key in SCHEMA[sec]:
            out.append(f"config {sec}.{key} = {format_value(cfg[sec][key])}")
    return out


def columns_for(rows: list[dict], preferred=()) -> list[str]:
    seen = [c for c in preferred if any(c in r for r in rows)]
    for r in rows:
        for c in r:
            if c not in seen:
                seen.append(c)
    return seen


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (tuple, list)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, numbers.Integral) and not isinstance(v, bool):
        return int(v)
    return v


def render(schema: str, cfg: dict, rows: list[dict], *, fmt: str = "csv", preferred=(),
           comments=(), extra: dict | None = None) -> str:
    """Serialize rows; CSV starts with ``# schema`` then the effective config."""
    schema_id = f"{schema}/{SCHEMA_VERSION}"
    cols = columns_for(rows, preferred)
    if fmt == "json":
        doc = {"schema": schema_id,
               "config": {f"{s}.{k}": _json_value(cfg[s][k]) for s in SCHEMA for k in SCHEMA[s]},
               "rows": [{c: _json_value(r.get(c)) for c in cols} for r in rows]}
        if extra:
            doc.update({k: _json_value(v) for k, v in extra.items()})
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown output format {fmt!r}", key="run.format")
    buf = io.StringIO()
    buf.write(f"# schema {schema_id}\n")
    for line in config_lines(cfg):
        buf.write(f"# {line}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([format_value(r.get(c)) for c in cols])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[dict[str, str]]]:
    """Header comments and rows (as strings) of a file written by :func:`render`."""
    lines = text.splitlines()
    comments = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return comments, list(csv.DictReader(body))
