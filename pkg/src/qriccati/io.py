"""System files and deterministic report serialization.

A system file is a JSON object::

    {"T": 1.0,
     "a": {"c0": {"const": 1.0, "harmonics": [[1, 0.0, 0.3]]}, ...},
     "b": ..., "c": ..., "d": ...,
     "name": "optional label"}

Missing coefficients and components are zero, a missing ``const`` is 0 and a
missing ``harmonics`` list is empty. A component can instead be tabulated as
``{"samples": [...], "n_harmonics": k}`` (uniform samples on ``[0, T)``); it
is fitted by least squares and the fit residual is reported.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import QuaternionCoefficient, RealFourierSeries, RiccatiSystem
from .errors import ParseError, ValidationError

COEFFICIENTS = ("a", "b", "c", "d")
COMPONENTS = ("c0", "c1", "c2", "c3")
_TOP_KEYS = {"T", "name", *COEFFICIENTS}
_SERIES_KEYS = {"const", "harmonics"}
_TABULATED_KEYS = {"samples", "n_harmonics"}


@dataclass
class LoadedSystem:
    system: RiccatiSystem
    fit_residuals: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def stem(self) -> str:
        if self.source is None:
            return self.system.name or "system"
        return Path(self.source).stem


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {type(value).__name__}", where)
    if not math.isfinite(value):
        raise ValidationError(f"{where}: value must be finite", where)
    return float(value)


def _series(obj, T, where, residuals):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return RealFourierSeries(T, _number(obj, where))
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected a series object", where)
    keys = set(obj)
    if keys & _TABULATED_KEYS:
        unknown = keys - _TABULATED_KEYS
        if unknown:
            raise ValidationError(f"{where}: unknown key {sorted(unknown)[0]!r}", f"{where}.{sorted(unknown)[0]}")
        if "samples" not in obj or "n_harmonics" not in obj:
            raise ValidationError(f"{where}: tabulated input needs 'samples' and 'n_harmonics'", where)
        samples = obj["samples"]
        if not isinstance(samples, list) or not samples:
            raise ValidationError(f"{where}.samples: expected a non-empty list", f"{where}.samples")
        ys = [_number(v, f"{where}.samples[{i}]") for i, v in enumerate(samples)]
        nh = obj["n_harmonics"]
        if isinstance(nh, bool) or not isinstance(nh, int) or nh < 0:
            raise ValidationError(f"{where}.n_harmonics: expected a non-negative integer", f"{where}.n_harmonics")
        try:
            series, rms = RealFourierSeries.fit(T, ys, nh)
        except ValueError as exc:
            raise ValidationError(f"{where}: {exc}", where) from exc
        residuals[where] = rms
        return series
    unknown = keys - _SERIES_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"{where}: unknown key {key!r}", f"{where}.{key}")
    const = _number(obj.get("const", 0.0), f"{where}.const")
    harmonics = obj.get("harmonics", [])
    if not isinstance(harmonics, list):
        raise ValidationError(f"{where}.harmonics: expected a list", f"{where}.harmonics")
    rows = []
    for i, h in enumerate(harmonics):
        hw = f"{where}.harmonics[{i}]"
        if not isinstance(h, list) or len(h) != 3:
            raise ValidationError(f"{hw}: expected [k, cos_amp, sin_amp]", hw)
        k = h[0]
        if isinstance(k, bool) or not isinstance(k, (int, float)) or k != int(k) or k < 1:
            raise ValidationError(f"{hw}: harmonic index must be a positive integer", hw)
        rows.append((int(k), _number(h[1], hw), _number(h[2], hw)))
    return RealFourierSeries.from_harmonics(T, const, rows)


def system_from_dict(obj, *, source: str | None = None) -> LoadedSystem:
    """Validate a decoded system object and build the :class:`RiccatiSystem`."""
    if not isinstance(obj, dict):
        raise ValidationError("top level: expected a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"unknown top-level key {key!r}", key)
    if "T" not in obj:
        raise ValidationError("missing required field 'T'", "T")
    T = _number(obj["T"], "T")
    if T <= 0:
        raise ValidationError(f"T must be positive, got {T}", "T")
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("name: expected a string", "name")
    residuals = {}
    coefs = {}
    for cname in COEFFICIENTS:
        block = obj.get(cname, {})
        if not isinstance(block, dict):
            raise ValidationError(f"{cname}: expected an object with keys c0..c3", cname)
        bad = set(block) - set(COMPONENTS)
        if bad:
            key = sorted(bad)[0]
            raise ValidationError(f"{cname}: unknown component {key!r}", f"{cname}.{key}")
        comps = [_series(block.get(k, 0.0), T, f"{cname}.{k}", residuals) for k in COMPONENTS]
        coefs[cname] = QuaternionCoefficient(comps)
    system = RiccatiSystem(coefs["a"], coefs["b"], coefs["c"], coefs["d"], name=name)
    return LoadedSystem(system, residuals, source)


def parse_system(text: str, *, source: str | None = None) -> LoadedSystem:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source or '<input>'}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno) from exc
    return system_from_dict(obj, source=source)


def load_system(path) -> LoadedSystem:
    path = Path(path)
    return parse_system(path.read_text(encoding="utf-8"), source=str(path))


def series_to_dict(f: RealFourierSeries) -> dict:
    return {"const": f.const, "harmonics": [[k, c, s] for k, c, s in f.harmonics]}


def coefficient_to_dict(q: QuaternionCoefficient) -> dict:
    return {name: series_to_dict(f) for name, f in zip(COMPONENTS, q.components)}


def coefficient_from_dict(obj, T: float, where: str = "lambda") -> QuaternionCoefficient:
    residuals = {}
    return QuaternionCoefficient([_series(obj.get(k, 0.0), T, f"{where}.{k}", residuals) for k in COMPONENTS])


def system_to_dict(sys: RiccatiSystem) -> dict:
    out = {"T": sys.T}
    for cname, coef in zip(COEFFICIENTS, sys.coefficients):
        out[cname] = coefficient_to_dict(coef)
    if sys.name:
        out["name"] = sys.name
    return out


def record_from_dict(obj, T: float):
    """Rebuild a :class:`~qriccati.transforms.TransformRecord` step list for replay."""
    from .transforms import TransformRecord, TransformStep

    record = TransformRecord()
    for i, s in enumerate(obj.get("steps", [])):
        lam = s.get("lambda")
        step = TransformStep(
            s["kind"],
            unit=tuple(s["unit"]) if "unit" in s else None,
            lam=None if lam is None else coefficient_from_dict(lam, T, f"steps[{i}].lambda"),
            n_harmonics=s.get("n_harmonics"),
        )
        record.steps.append(step)
    return record


# ---------------------------------------------------------------------------
# deterministic JSON


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _encode(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # JSON has no NaN or infinity; they are written as null
        return format(obj + 0.0, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[" + ",".join(pad + _encode(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items())
        return "{" + ",".join(f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items) + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """JSON text with sorted keys and every float written with 17 significant digits."""
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path
