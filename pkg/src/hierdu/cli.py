"""Command-line front end: JSON job configs in, CSV tables and a JSON manifest out.

Config layout::

    {"output": "out", "format": "csv", "seed": 0,
     "jobs": [{"kind": "verify", "name": "cnot", "gate": {"kind": "named", "q": 2,
               "params": {"name": "cnot"}}, "expect": {"level": 2}}]}

A config with a top-level "kind" is a single job.  Every job writes
<output>/<name>.csv (or .json) and one manifest.json collects checks,
residuals, tolerances and runtimes.  The exit status is nonzero iff some
job failed a check or raised.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from ._config import TOL_UNIT, BudgetError
from .analysis import classify_hierarchy, ep_gt, verify_Lk, verify_unitary
from .io import gate_from_spec, gate_to_spec, write_csv, write_json
from .membrane import elt_scan, ve_bounds, ve_from_rank, z2_closed_form
from .opdyn import otoc_profile, tripartite_info
from .quench import correlator_map, entanglement_growth
from .tensor_core import UnitaryGate, hermitian_basis, schmidt_values

JOB_KINDS = ("verify", "schmidt", "membrane", "otoc", "tripartite", "quench", "correlator", "search", "bounds")


class ConfigError(ValueError):
    """A config that does not match the schema; the message names the field."""


# ------------------------------------------------------------------ schema

_REQ = object()

# field -> (accepted types, default); _REQ marks required fields
_SCHEMA: dict[str, dict[str, tuple[tuple[type, ...], Any]]] = {
    "verify": {"gate": ((dict,), _REQ), "k_max": ((int,), 4), "tol": ((float, int), TOL_UNIT),
               "expect": ((dict,), None)},
    "schmidt": {"gate": ((dict,), _REQ), "tol": ((float, int), TOL_UNIT), "ell_max": ((int,), 1)},
    "membrane": {"gate": ((dict,), _REQ), "velocities": ((list,), [0.0, 0.5, 1.0]), "t_values": ((list,), [8]),
                 "alpha": ((int,), 2), "expect_elt": ((list,), None), "tol": ((float, int), TOL_UNIT)},
    "otoc": {"gate": ((dict,), _REQ), "alpha": ((int,), 0), "beta": ((int,), 0), "x_max": ((int,), 6),
             "x_min": ((int,), None), "t_max": ((int,), 6)},
    "tripartite": {"gate": ((dict,), _REQ), "x": ((int,), 0), "t_values": ((list,), [2, 4, 6, 8])},
    "quench": {"gate": ((dict,), _REQ), "N": ((int,), 12), "layers": ((int,), 16), "seed": ((int,), 0),
               "n_states": ((int,), 1)},
    "correlator": {"gate": ((dict,), _REQ), "t_max": ((int,), 6), "op_A": ((list,), None),
                   "op_B": ((list,), None), "support": ((int,), 3), "seed": ((int,), 0),
                   "threshold": ((float, int), 1e-10)},
    "search": {"q": ((int,), 2), "samples": ((int,), None), "seed": ((int,), 0)},
    "bounds": {"q": ((int,), _REQ), "k_left": ((int,), None), "k_right": ((int,), None),
               "B_left": ((float, int), None), "B_right": ((float, int), None)},
}
_COMMON = {"kind", "name"}


def validate_job(job: Any, where: str) -> dict:
    if not isinstance(job, dict):
        raise ConfigError(f"{where}: a job must be a JSON object")
    kind = job.get("kind")
    if kind not in JOB_KINDS:
        raise ConfigError(f"{where}.kind: expected one of {', '.join(JOB_KINDS)}, got {kind!r}")
    schema = _SCHEMA[kind]
    unknown = set(job) - set(schema) - _COMMON
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}: unknown field for a {kind} job")
    out = {"kind": kind, "name": job.get("name") or kind}
    if not isinstance(out["name"], str):
        raise ConfigError(f"{where}.name: expected a string")
    for key, (types, default) in schema.items():
        if key not in job or job[key] is None:
            if default is _REQ:
                raise ConfigError(f"{where}.{key}: required for a {kind} job")
            out[key] = default
            continue
        val = job[key]
        if isinstance(val, bool) or not isinstance(val, types):
            names = "/".join(t.__name__ for t in types)
            raise ConfigError(f"{where}.{key}: expected {names}, got {type(val).__name__}")
        out[key] = val
    return out


def validate_config(cfg: Any) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    if "kind" in cfg:
        top = {k: cfg[k] for k in ("output", "format", "seed") if k in cfg}
        cfg = {**top, "jobs": [{k: v for k, v in cfg.items() if k not in top}]}
    jobs = cfg.get("jobs")
    if not isinstance(jobs, list) or not jobs:
        raise ConfigError("jobs: expected a nonempty list")
    fmt = cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: expected 'csv' or 'json', got {fmt!r}")
    seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed: expected an integer")
    out = {"output": str(cfg.get("output", "hierdu_out")), "format": fmt, "seed": seed, "jobs": []}
    names = set()
    for i, job in enumerate(jobs):
        if isinstance(job, dict) and "seed" in _SCHEMA.get(job.get("kind"), {}) and "seed" not in job:
            job = {**job, "seed": seed}
        v = validate_job(job, f"jobs[{i}]")
        if v["name"] in names:
            v["name"] = f"{v['name']}_{i}"
        names.add(v["name"])
        out["jobs"].append(v)
    return out


# ------------------------------------------------------------------ bundle


def check(name: str, value: Any, expected: Any, tol: float | None = None) -> dict:
    """A pass/fail record; numbers compare within tol, everything else by equality."""
    if tol is not None and value is not None and expected is not None:
        residual = abs(float(value) - float(expected))
        ok = residual <= tol
    else:
        residual = None
        ok = value == expected
    return {"name": name, "value": value, "expected": expected, "tolerance": tol,
            "residual": residual, "pass": bool(ok)}


@dataclass
class JobResult:
    name: str
    kind: str
    config: dict
    columns: tuple[str, ...] = ()
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: list[dict] = field(default_factory=list)
    runtime_s: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and all(c["pass"] for c in self.checks)


@dataclass
class ReportBundle:
    config: dict
    jobs: list[JobResult]
    files: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(j.ok for j in self.jobs)

    def manifest(self) -> dict:
        return {
            "tool": "hierdu", "version": __version__,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "config": self.config, "ok": self.ok,
            "jobs": [{"name": j.name, "kind": j.kind, "ok": j.ok, "error": j.error,
                      "runtime_s": j.runtime_s, "summary": j.summary, "checks": j.checks}
                     for j in self.jobs],
            "files": self.files,
        }


# ------------------------------------------------------------------ jobs


def _gate(job: dict) -> UnitaryGate:
    try:
        return gate_from_spec(job["gate"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{job['name']}.gate: {exc}") from exc


def _job_verify(job: dict, res: JobResult) -> None:
    G, tol = _gate(job), float(job["tol"])
    rep = classify_hierarchy(G, job["k_max"], tol)
    lv = (rep.level_left, rep.level_right)
    level = max(lv) if None not in lv else None
    res.summary = {"gate": gate_to_spec(G, with_matrix=False), "unitary_residual": verify_unitary(G).residual,
                   "dual_unitary": rep.dual_unitary.ok, "dual_unitary_residual": rep.dual_unitary.residual,
                   "t_dual": rep.t_dual.ok, "t_dual_residual": rep.t_dual.residual,
                   "level_left": rep.level_left, "level_right": rep.level_right, "level": level,
                   "monotone": rep.monotone}
    res.columns = ("check", "residual", "tolerance")
    res.rows = [{"check": k, "residual": v, "tolerance": tol} for k, v in rep.residuals.items()]
    res.checks.append(check("unitary", verify_unitary(G, tol).ok, True))
    for key, want in (job["expect"] or {}).items():
        if key not in res.summary:
            raise ConfigError(f"{job['name']}.expect.{key}: not a verify output")
        res.checks.append(check(key, res.summary[key], want))


def _job_schmidt(job: dict, res: JobResult) -> None:
    G = _gate(job)
    lam = schmidt_values(G)
    m = ep_gt(G, job["ell_max"])
    nz = lam[lam > 1e-8 * lam[0]]
    flat = float(nz.max() / nz.min() - 1)
    res.columns = ("index", "lambda")
    res.rows = [{"index": i, "lambda": float(v)} for i, v in enumerate(lam)]
    res.summary = {"q": G.q, "rank": m.schmidt_rank, "flatness": flat, "b1": m.b1, "B1": m.b1 * G.q**2, "B": m.B,
                   "EP": m.EP, "GT": m.GT, "v_E_from_rank": ve_from_rank(G.q, m.schmidt_rank)}
    res.checks.append(check("sum_lambda2", float(np.sum(lam**2)), G.q**2, 1e-8 * G.q**2))


def _job_membrane(job: dict, res: JobResult) -> None:
    G = _gate(job)
    scan = elt_scan(G, job["velocities"], job["t_values"], job["alpha"])
    res.columns = scan.COLUMNS
    res.rows = scan.rows
    res.summary = {"q": scan.q, "alpha": scan.alpha, "v_E": scan.v_E,
                   "elt_at_tmax": {str(k): v for k, v in scan.elt.items()}}
    l2 = verify_Lk(G, 2, "right").ok and verify_Lk(G, 2, "left").ok
    if l2 and job["alpha"] == 2:
        from .analysis import b1_from_schmidt

        b1 = b1_from_schmidt(G)
        worst = max(abs(r["Z"] / z2_closed_form(b1, G.q, r["m"], r["n"]) - 1) for r in scan.rows)
        res.checks.append(check("closed_form_rel_error", worst, 0.0, 1e-10))
    if job["expect_elt"] is not None:
        tmax = max(job["t_values"])
        got = [r["ELT"] for r in scan.rows if r["t"] == tmax]
        if len(got) != len(job["expect_elt"]):
            raise ConfigError(f"{job['name']}.expect_elt: need one value per velocity")
        for v, g, e in zip(job["velocities"], got, job["expect_elt"]):
            res.checks.append(check(f"ELT(v={v})", g, e, float(job["tol"])))


def _job_otoc(job: dict, res: JobResult) -> None:
    G = _gate(job)
    prof = otoc_profile(G, job["alpha"], job["beta"], job["x_max"], job["t_max"], job["x_min"])
    res.columns = ("x", "t", "C_real", "C_imag")
    res.rows = prof.rows()
    res.summary = {"operators": list(prof.labels), "convention": prof.convention}


def _job_tripartite(job: dict, res: JobResult) -> None:
    from .analysis import b1_from_schmidt

    G = _gate(job)
    b1 = b1_from_schmidt(G)
    res.columns = ("x", "t", "I3", "t_log_b1")
    res.rows = [{"x": job["x"], "t": t, "I3": tripartite_info(G, job["x"], t), "t_log_b1": t * math.log(b1)}
                for t in job["t_values"]]
    res.summary = {"b1": b1}


def _job_quench(job: dict, res: JobResult) -> None:
    G = _gate(job)
    g = entanglement_growth(G, job["N"], job["layers"], job["seed"], n_states=job["n_states"])
    res.columns = g.COLUMNS
    res.rows = list(g.rows())
    res.summary = g.metadata()
    res.checks.append(check("below_reference_slope", not g.exceeds_reference, True))


def _ops(spec: list | None, q: int, support: int, rng: np.random.Generator, where: str) -> list[np.ndarray]:
    basis = hermitian_basis(q)
    if spec is None:
        out = []
        for _ in range(support):
            v = rng.standard_normal(len(basis))
            v /= np.linalg.norm(v)
            out.append(sum(c * b for c, b in zip(v, basis)))
        return out
    if not spec or any(isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < len(basis) for i in spec):
        raise ConfigError(f"{where}: expected a list of basis indices in [0, {len(basis)})")
    return [basis[i] for i in spec]


def _job_correlator(job: dict, res: JobResult) -> None:
    G = _gate(job)
    rng = np.random.default_rng(job["seed"])
    A = _ops(job["op_A"], G.q, job["support"], rng, f"{job['name']}.op_A")
    B = _ops(job["op_B"], G.q, job["support"], rng, f"{job['name']}.op_B")
    cm = correlator_map(G, A, B, job["t_max"], max(len(A), len(B)))
    cm.threshold = float(job["threshold"])
    res.columns = cm.COLUMNS
    res.rows = list(cm.rows())
    rays = [-1.0, -0.5, -1 / 3, 0.0, 1 / 3, 0.5, 1.0]
    res.summary = {"support": cm.support, "threshold": cm.threshold,
                   "rays": {f"{v:.6g}": c for v, c in cm.classify(rays).items()}}
    outside = [abs(v) for (x, t), v in cm.values.items() if t and (x + cm.support - 1 < -t or x - cm.support + 1 > t)]
    res.checks.append(check("causality", max(outside, default=0.0), 0.0, 1e-12))


def _job_search(job: dict, res: JobResult) -> None:
    from .gates import permutation_search_L2

    r = permutation_search_L2(job["q"], job["samples"], job["seed"])
    res.columns = ("perm", "rank")
    res.rows = [{"perm": " ".join(map(str, p)), "rank": k} for p, k in r.members]
    ent = r.entangling
    res.summary = {"q": r.q, "exhaustive": r.exhaustive, "scanned": r.scanned, "flat": r.flat,
                   "members": len(r.members), "entangling": len(ent), "histogram": r.histogram}
    D = job["q"] ** 2
    res.checks.append(check("ranks_divide_q2", all(D % k == 0 for _, k in r.members), True))


def _job_bounds(job: dict, res: JobResult) -> None:
    try:
        b = ve_bounds(job["q"], job["k_left"], job["k_right"], job["B_left"], job["B_right"])
    except ValueError as exc:
        raise ConfigError(f"{job['name']}: {exc}") from exc
    res.columns = ("case", "lower", "upper", "v_star_left", "v_star_right")
    res.rows = [{"case": b.case, "lower": b.lower, "upper": b.upper,
                 "v_star_left": b.v_star_left, "v_star_right": b.v_star_right}]
    res.summary = b.to_dict()
    res.checks.append(check("lower_le_upper", b.lower <= b.upper + 1e-12, True))


_RUNNERS: dict[str, Callable[[dict, JobResult], None]] = {
    "verify": _job_verify, "schmidt": _job_schmidt, "membrane": _job_membrane, "otoc": _job_otoc,
    "tripartite": _job_tripartite, "quench": _job_quench, "correlator": _job_correlator,
    "search": _job_search, "bounds": _job_bounds,
}


def run_job(job: dict) -> JobResult:
    res = JobResult(job["name"], job["kind"], job)
    t0 = time.perf_counter()
    try:
        _RUNNERS[job["kind"]](job, res)
    except (ConfigError, BudgetError, ValueError, np.linalg.LinAlgError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    res.runtime_s = time.perf_counter() - t0
    return res


def run_config(path_or_config: "str | Path | dict") -> ReportBundle:
    """Validate a config (path or dict) and run its jobs in order; job failures are recorded, not raised."""
    if isinstance(path_or_config, dict):
        raw = path_or_config
    else:
        try:
            raw = json.loads(Path(path_or_config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
    cfg = validate_config(raw)
    return ReportBundle(cfg, [run_job(j) for j in cfg["jobs"]])


def emit(bundle: ReportBundle, fmt: str | None = None, out: "str | Path | None" = None) -> list[Path]:
    fmt = fmt or bundle.config["format"]
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    root = Path(out or bundle.config["output"])
    paths = []
    for j in bundle.jobs:
        if not j.columns:
            continue
        if fmt == "csv":
            paths.append(write_csv(root / f"{j.name}.csv", j.rows, j.columns))
        else:
            paths.append(write_json(root / f"{j.name}.json",
                                    {"columns": list(j.columns), "rows": [[r.get(c) for c in j.columns] for r in j.rows]}))
    bundle.files = [p.name for p in paths]
    paths.append(write_json(root / "manifest.json", bundle.manifest()))
    return paths


# ------------------------------------------------------------------ argparse


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _gate_arg(text: str) -> dict:
    p = Path(text)
    src = p.read_text() if p.exists() else text
    try:
        spec = json.loads(src)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"--gate: not a file or JSON gate spec ({exc})") from exc
    if not isinstance(spec, dict):
        raise argparse.ArgumentTypeError("--gate: expected a JSON object")
    return spec


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hierdu", description="Solvable brickwork circuit toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run every job of a config file")
    run.add_argument("config", help="path to a JSON config")
    for kind in JOB_KINDS:
        sp = sub.add_parser(kind, help=f"run a single {kind} job")
        sp.add_argument("--config", help="JSON config holding a single job of this kind")
        if "gate" in _SCHEMA[kind]:
            sp.add_argument("--gate", type=_gate_arg, help="gate spec as a JSON file or inline JSON")
            sp.add_argument("--named", help="shortcut for a named gate, e.g. cnot")
        sp.add_argument("--q", type=int, help="local dimension for --named or the job itself")
        sp.add_argument("--name", help="job name used for output files")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a job field; VALUE is parsed as JSON when possible")
    for sp in sub.choices.values():
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int, help="default seed for seeded jobs")
    return ap


def _single_job(args: argparse.Namespace) -> dict:
    kind = args.command
    cfg: dict = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        if "jobs" in cfg:
            if len(cfg["jobs"]) != 1:
                raise ConfigError("jobs: a subcommand config must hold exactly one job")
            top = {k: cfg[k] for k in ("output", "format", "seed") if k in cfg}
            cfg = {**top, **cfg["jobs"][0]}
    if cfg.get("kind", kind) != kind:
        raise ConfigError(f"kind: config holds a {cfg['kind']} job, not {kind}")
    cfg["kind"] = kind
    if getattr(args, "gate", None) is not None:
        cfg["gate"] = args.gate
    if getattr(args, "named", None):
        cfg["gate"] = {"kind": "named", "q": args.q or 2, "params": {"name": args.named}}
    elif args.q is not None and "q" in _SCHEMA[kind]:
        cfg["q"] = args.q
    if args.name:
        cfg["name"] = args.name
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        cfg[key] = _parse_value(val)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(Path(args.config).read_text()) if args.command == "run" else _single_job(args)
        if args.seed is not None:
            raw["seed"] = args.seed
        bundle = run_config(raw)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"hierdu: {exc}", file=sys.stderr)
        return 2
    emit(bundle, args.format, args.out)
    for j in bundle.jobs:
        status = "ok" if j.ok else ("error" if j.error else "FAIL")
        line = f"{j.kind:<11} {j.name:<24} {status:<5} {j.runtime_s:8.2f}s"
        if j.error:
            line += f"  {j.error}"
        print(line)
    return 0 if bundle.ok else 1


if __name__ == "__main__":
    sys.exit(main())
