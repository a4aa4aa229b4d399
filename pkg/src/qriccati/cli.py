"""Command line front end: ``qriccati {check,find,reduce,classify,integrate,compare}``.

Exit status: 0 success, 2 hypotheses not applicable, 3 no convergence,
4 input error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys as _sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conditions as cond
from .errors import (
    CapExceeded,
    NoConvergence,
    NotApplicable,
    ParseError,
    StrictRefusal,
    Unclassified,
    ValidationError,
)
from .finder import FinderSettings, classify_pair, find_periodic_solution
from .integrator import IntegrationSettings, integrate_ivp, write_trajectory_csv
from .io import LoadedSystem, load_system, record_from_dict, system_to_dict, write_json
from .quaternion import from_signed
from .transforms import classify_sign_case, reduce_to_case_I, replay, time_reverse

EXIT_OK = 0
EXIT_NOT_APPLICABLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INPUT_ERROR = 4

COMPARE_COLUMNS = ("system", "theorem31_applicable", "theorem11_applicable", "route", "found", "residual", "m0")

log = logging.getLogger("qriccati")


class InputError(Exception):
    """Bad command line arguments or unreadable input."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "not applicable"
    def error(self, message):
        self.print_usage(_sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _quaternion(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma-separated numbers: {text!r}") from None
    if len(vals) == 1:
        vals += [0.0, 0.0, 0.0]
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected 1 or 4 comma-separated numbers: {text!r}")
    return tuple(vals)


@dataclass
class RunConfig:
    command: str
    inputs: list
    out: Path = Path(".")
    grid: int = 512
    rtol: float = 1e-10
    atol: float = 1e-12
    m0: int | None = None
    strict_proof: bool = False
    force: bool = False
    emit_trajectory: bool = False
    periods: int = 50
    q0: tuple = (0.0, 0.0, 0.0, 0.0)
    qa: tuple | None = None
    qb: tuple | None = None
    artifacts: list = field(default_factory=list)

    @property
    def integration(self) -> IntegrationSettings:
        return IntegrationSettings(rel_tol=self.rtol, abs_tol=self.atol)

    @property
    def finder(self) -> FinderSettings:
        return FinderSettings(grid_size=self.grid, polish=not self.strict_proof)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_positive_int, default=512, metavar="N", help="grid points per period for sign scans")
    common.add_argument("--rtol", type=_positive_float, default=1e-10, help="integrator relative tolerance")
    common.add_argument("--atol", type=_positive_float, default=1e-12, help="integrator absolute tolerance")
    common.add_argument("--out", type=Path, default=Path("."), metavar="DIR", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    finding = argparse.ArgumentParser(add_help=False)
    finding.add_argument("--m0", type=_positive_int, default=None, help="override the period multiplier")
    finding.add_argument("--strict-proof", action="store_true", help="pure bisection, no Newton polish")
    finding.add_argument("--force", action="store_true", help="run the finder even when the hypotheses fail")

    parser = _Parser(prog="qriccati", description="Periodic solutions of quaternionic Riccati equations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="check the existence hypotheses")
    p.add_argument("inputs", nargs="+", type=Path)

    p = sub.add_parser("find", parents=[common, finding], help="find and certify a periodic solution")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--emit-trajectory", action="store_true", help="also write <stem>.traj.csv over one period")

    p = sub.add_parser("reduce", parents=[common], help="reduce the sign pattern of a to the covered case")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--strict-proof", action="store_true", help="refuse the ambiguous negation step")

    p = sub.add_parser("classify", parents=[common], help="normality test for a pair of solutions")
    p.add_argument("inputs", nargs=1, type=Path)
    p.add_argument("--qa", type=_quaternion, required=True, help="first start value, signed c0,c1,c2,c3")
    p.add_argument("--qb", type=_quaternion, required=True, help="second start value, signed c0,c1,c2,c3")
    p.add_argument("--periods", type=_positive_int, default=50, metavar="N")

    p = sub.add_parser("integrate", parents=[common], help="integrate one initial value problem to CSV")
    p.add_argument("inputs", nargs=1, type=Path)
    p.add_argument("--q0", type=_quaternion, default=(0.0, 0.0, 0.0, 0.0), help="start value, signed c0,c1,c2,c3")
    p.add_argument("--periods", type=_positive_int, default=1, metavar="N")

    p = sub.add_parser("compare", parents=[common, finding], help="applicability and finder table over many systems")
    p.add_argument("inputs", nargs="+", type=Path, help="system files or directories of *.json files")
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, inputs=list(ns.inputs))
    for name in ("out", "grid", "rtol", "atol", "m0", "strict_proof", "force", "emit_trajectory", "periods", "q0", "qa", "qb"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if getattr(ns, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    return cfg


def _expand_inputs(paths) -> list[Path]:
    out = []
    for p in paths:
        if p.is_dir():
            out.extend(sorted(p.glob("*.json")))
        else:
            out.append(p)
    return out


def _load(path: Path) -> LoadedSystem:
    try:
        return load_system(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def _emit(cfg: RunConfig, name: str, payload) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    try:
        write_json(payload, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    cfg.artifacts.append(path)
    return path


def _fit_section(loaded: LoadedSystem) -> dict:
    return {"fit_residuals": loaded.fit_residuals} if loaded.fit_residuals else {}


def _m0_section(sys, report: cond.ConditionReport) -> dict:
    if report.route in (cond.THEOREM31, cond.COROLLARY32):
        target, direct, profile = sys, True, report.discriminant_profile
    elif report.route == cond.COROLLARY31:
        target, direct, profile = time_reverse(sys), False, None
    else:
        return {}
    try:
        return cond.estimate_m0(target, profile, use_remark31=direct).to_dict()
    except CapExceeded as exc:
        return {"m0": None, "method": "Search", "details": {"reason": str(exc)}}


def cmd_check(cfg: RunConfig) -> int:
    status = EXIT_OK
    for path in _expand_inputs(cfg.inputs):
        loaded = _load(path)
        sys = loaded.system
        report = cond.check_theorem31_conditions(sys, cfg.grid)
        payload = {"command": "check", "system": loaded.stem, **report.to_dict(), **_fit_section(loaded)}
        m0 = _m0_section(sys, report)
        if m0:
            payload["theorem31"]["m0_estimate"] = m0
        _emit(cfg, f"{loaded.stem}.report.json", payload)
        print(f"{loaded.stem}: route {report.route}; Theorem 1.1 conditions {'hold' if report.theorem11_applicable else 'fail'}")
        if report.route == cond.NOT_APPLICABLE:
            status = max(status, EXIT_NOT_APPLICABLE)
    return status


def _write_periodic_trajectory(cfg, loaded, rep):
    sys = loaded.system
    traj = integrate_ivp(sys, rep.q0.to_quaternion(), 0.0, rep.m0 * sys.T, cfg.integration)
    path = cfg.out / f"{loaded.stem}.traj.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_trajectory_csv(traj, fh)
    cfg.artifacts.append(path)


def _find_one(cfg: RunConfig, loaded: LoadedSystem):
    """Return ``(exit status, payload, solution report or None, condition report)``."""
    sys = loaded.system
    report = cond.check_theorem31_conditions(sys, cfg.grid)
    base = {"command": "find", "system": loaded.stem, "conditions": report.to_dict(), **_fit_section(loaded)}
    try:
        rep = find_periodic_solution(sys, cfg.integration, cfg.finder, m0=cfg.m0, force=cfg.force, report=report)
    except NotApplicable:
        return EXIT_NOT_APPLICABLE, {**base, "status": "NotApplicable"}, None, report
    except NoConvergence as exc:
        diag = exc.diagnostics if isinstance(exc.diagnostics, dict) else {"detail": exc.diagnostics}
        return EXIT_NO_CONVERGENCE, {**base, "status": "NoConvergence", "diagnostics": diag}, None, report
    return EXIT_OK, {**base, "status": "Found", "solution": rep.to_dict()}, rep, report


def cmd_find(cfg: RunConfig) -> int:
    status = EXIT_OK
    for path in _expand_inputs(cfg.inputs):
        loaded = _load(path)
        code, payload, rep, _ = _find_one(cfg, loaded)
        _emit(cfg, f"{loaded.stem}.report.json", payload)
        if rep is not None:
            if cfg.emit_trajectory:
                _write_periodic_trajectory(cfg, loaded, rep)
            q = ", ".join(format(v, ".10g") for v in rep.q0)
            print(f"{loaded.stem}: {rep.route}, m0 = {rep.m0}, q0 (signed) = ({q}), residual {rep.residual:.3e}")
        else:
            print(f"{loaded.stem}: {payload['status']}")
        status = max(status, code)
    return status


def cmd_reduce(cfg: RunConfig) -> int:
    status = EXIT_OK
    for path in _expand_inputs(cfg.inputs):
        loaded = _load(path)
        sys = loaded.system
        case = classify_sign_case(sys.a, cfg.grid)
        payload = {"command": "reduce", "system": loaded.stem, "source_case": case.name, "signs": list(case.signs)}
        try:
            reduced, record = reduce_to_case_I(sys, cfg.grid, strict=cfg.strict_proof)
        except (Unclassified, StrictRefusal) as exc:
            payload.update(status=type(exc).__name__, reason=str(exc))
            _emit(cfg, f"{loaded.stem}.report.json", payload)
            print(f"{loaded.stem}: {exc}")
            status = max(status, EXIT_NOT_APPLICABLE)
            continue
        # the record must replay to the same coefficients
        replayed = record_from_dict(record.to_dict(), sys.T)
        assert replay(replayed, sys) == reduced
        payload.update(status="Reduced", final_case=classify_sign_case(reduced.a, cfg.grid).name, record=record.to_dict())
        _emit(cfg, f"{loaded.stem}.report.json", payload)
        _emit(cfg, f"{loaded.stem}.reduced.json", system_to_dict(reduced))
        kinds = " -> ".join(s.kind for s in record.steps) or "(none)"
        print(f"{loaded.stem}: case {case.name} reduced by {kinds}")
    return status


def cmd_classify(cfg: RunConfig) -> int:
    loaded = _load(cfg.inputs[0])
    res = classify_pair(loaded.system, cfg.qa, cfg.qb, cfg.periods, cfg.integration)
    _emit(cfg, f"{loaded.stem}.report.json", {"command": "classify", "system": loaded.stem, "periods": cfg.periods, **res.to_dict()})
    print(f"{loaded.stem}: {res.classification} (drift rate {res.drift_rate:.6g})")
    return EXIT_OK


def cmd_integrate(cfg: RunConfig) -> int:
    loaded = _load(cfg.inputs[0])
    sys = loaded.system
    traj = integrate_ivp(sys, from_signed(np.asarray(cfg.q0)), 0.0, cfg.periods * sys.T, cfg.integration)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{loaded.stem}.traj.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_trajectory_csv(traj, fh)
    cfg.artifacts.append(path)
    tail = f" at t = {traj.t_escape:.10g}" if traj.t_escape is not None else ""
    print(f"{loaded.stem}: {traj.status.value}{tail}; {traj.t.size} samples")
    return EXIT_OK


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def cmd_compare(cfg: RunConfig) -> int:
    rows = []
    for path in _expand_inputs(cfg.inputs):
        loaded = _load(path)
        _, _, rep, report = _find_one(cfg, loaded)
        rows.append({
            "system": loaded.stem,
            "theorem31_applicable": report.theorem31_applicable,
            "theorem11_applicable": report.theorem11_applicable,
            "route": report.route,
            "found": rep is not None,
            "residual": None if rep is None else rep.residual,
            "m0": None if rep is None else rep.m0,
        })
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "compare.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in rows:
            w.writerow([_fmt_cell(row[c]) for c in COMPARE_COLUMNS])
    cfg.artifacts.append(path)
    print(f"wrote {path} ({len(rows)} systems)")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "find": cmd_find,
    "reduce": cmd_reduce,
    "classify": cmd_classify,
    "integrate": cmd_integrate,
    "compare": cmd_compare,
}


def run_command(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except (ParseError, ValidationError, InputError) as exc:
        field_ = getattr(exc, "field", None)
        suffix = f" (field {field_})" if field_ else ""
        print(f"input error: {exc}{suffix}", file=_sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as exc:
        print(f"io error: {exc}", file=_sys.stderr)
        return EXIT_INPUT_ERROR


def main(argv=None) -> int:
    return run_command(parse_config(argv))


if __name__ == "__main__":
    raise SystemExit(main())


__all__ = ["RunConfig", "build_parser", "parse_config", "run_command", "main"]
