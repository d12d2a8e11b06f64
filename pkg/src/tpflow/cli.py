"""Command-line runner: ``tpflow --config run.json [--task T] [--out DIR] [--threads N]``.

Exit codes: 0 all executed verifications pass, 1 a verification failed,
2 configuration error, 3 numerical abort (NaN/inf).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .asymptotics import SCAN_DIRECTIONS, downstream_axis, expansion_scan
from .core import Params, divergence_max, dump_field
from .kernels import mode_velocity_batch, oseen_gamma_batch, set_threads, tp_kernel_l2t_batch
from .solver import ForcingSpec, picard_solve, sample_forcing
from .verify import CLAIMS, DEFAULT_FORCING, run_claim

log = logging.getLogger("tpflow")

TASKS = ("kernels", "solve", "verify_all", "expand", "report")

_PARAM_KEYS = {
    "lambda": "lam",
    "period": "period",
    "box_half_length": "box_half_length",
    "n_spatial": "n_spatial",
    "n_temporal": "n_temporal",
    "dealias": "dealias",
    "tol_div": "tol_div",
    "tol_solver": "tol_solver",
    "max_iter": "max_iter",
}
_FORCING_KEYS = ("center", "radius", "amplitude", "time_profile", "harmonic", "weights")
_TOP_KEYS = ("params", "forcing", "tasks", "output_dir", "seed")

# fitted exponent -> claimed rate, for the summary table
RATES = [
    ("tp_kernel_decay", "alpha_kernel_min", "oscillatory kernel, L2 in time", "3"),
    ("tp_kernel_decay", "alpha_gradient_min", "oscillatory kernel gradient, L2 in time", "4"),
    ("oseen_properties", "alpha_downstream", "steady Oseen tensor, downstream axis", "1"),
    ("oseen_properties", "info:alpha_sphere_integral", "sphere integral of |grad Oseen|", "1/2"),
    ("expansion", "min:alpha_remainder", "remainder after the profile term", "3/2 - eps"),
]


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    params: Params = field(default_factory=Params)
    forcing: ForcingSpec = DEFAULT_FORCING
    tasks: list = field(default_factory=lambda: ["verify_all"])
    output_dir: Path | None = None
    seed: int = 0


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _fail(text, key, msg):
    raise ConfigError(f"config key '{key}' (line {_line_of(text, key)}): {msg}")


def _check_task(text, t):
    if t in TASKS:
        return
    if t.startswith("verify:"):
        if t.split(":", 1)[1] not in CLAIMS:
            _fail(text, "tasks", f"unknown claim_id {t.split(':', 1)[1]!r}")
        return
    _fail(text, "tasks", f"unknown task {t!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object (line 1)")
    for k in raw:
        if k not in _TOP_KEYS:
            _fail(text, k, "unknown key")
    cfg = RunConfig()
    p = raw.get("params", {})
    if not isinstance(p, dict):
        _fail(text, "params", "must be an object")
    kw = {}
    for k, v in p.items():
        if k not in _PARAM_KEYS:
            _fail(text, k, "unknown params key")
        if isinstance(v, bool) != (k == "dealias") or not isinstance(v, (int, float)):
            _fail(text, k, f"expected a {'boolean' if k == 'dealias' else 'number'}, got {v!r}")
        kw[_PARAM_KEYS[k]] = v
    if kw.get("lam", 1.0) == 0:
        _fail(text, "lambda", "drift required: lambda must be nonzero")
    for k in ("n_spatial", "n_temporal", "max_iter"):
        if k in kw and kw[k] != int(kw[k]):
            _fail(text, k, "must be an integer")
        if k in kw:
            kw[k] = int(kw[k])
    try:
        cfg.params = Params(**kw)
    except ValueError as e:
        bad = next((j for j, a in _PARAM_KEYS.items() if a in str(e) or j in str(e)), "params")
        _fail(text, bad, str(e))
    fr = raw.get("forcing")
    if fr is not None:
        if not isinstance(fr, dict):
            _fail(text, "forcing", "must be an object")
        for k in fr:
            if k not in _FORCING_KEYS:
                _fail(text, k, "unknown forcing key")
        for k in ("center", "amplitude"):
            if k in fr and (not isinstance(fr[k], list) or len(fr[k]) != 3):
                _fail(text, k, "expected a list of 3 numbers")
        try:
            cfg.forcing = ForcingSpec(**{k: tuple(map(tuple, v)) if k == "weights" else v for k, v in fr.items()})
        except (TypeError, ValueError) as e:
            _fail(text, "forcing", str(e))
    tasks = raw.get("tasks", cfg.tasks)
    if not isinstance(tasks, list) or not tasks or not all(isinstance(t, str) for t in tasks):
        _fail(text, "tasks", "must be a nonempty list of task names")
    for t in tasks:
        _check_task(text, t)
    cfg.tasks = list(tasks)
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
            _fail(text, "output_dir", "must be a nonempty path string")
        cfg.output_dir = Path(raw["output_dir"])
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        _fail(text, "seed", "must be an integer")
    cfg.seed = seed
    return cfg


# --------------------------------------------------------------------------
# artifacts


def _fmt(x) -> str:
    return format(float(x), ".12e")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dir_x", "dir_y", "dir_z", "radius", "quantity", "value"])
        for d, r, q, v in rows:
            w.writerow([_fmt(d[0]), _fmt(d[1]), _fmt(d[2]), _fmt(r), q, _fmt(v)])


def task_kernels(cfg: RunConfig, out: Path) -> None:
    p = cfg.params
    radii = np.geomspace(2.0, 40.0, 12)
    dirs = dict(SCAN_DIRECTIONS)
    dirs["downstream"] = tuple(downstream_axis(p.lam))
    rows = []
    for d in dirs.values():
        X = radii[:, None] * np.asarray(d)
        vals = {
            "gamma_oseen": np.linalg.norm(oseen_gamma_batch(X, p.lam), axis=(1, 2)),
            "tp_l2t": tp_kernel_l2t_batch(X, p, p.n_temporal, 0),
            "tp_l2t_grad": tp_kernel_l2t_batch(X, p, p.n_temporal, 1),
        }
        for k in range(1, p.n_temporal + 1):
            vals[f"mode_k{k}"] = np.linalg.norm(mode_velocity_batch(k, X, p), axis=(1, 2))
        for q, v in vals.items():
            rows += [(d, r, q, x) for r, x in zip(radii, v)]
    _write_rows(out / "decay_scan.csv", rows)


def task_solve(cfg: RunConfig, out: Path) -> None:
    f = sample_forcing(cfg.forcing, cfg.params)
    sol = picard_solve(f, cfg.params)
    dump_field(sol.u, out / "solution_u.bin")
    dump_field(sol.p, out / "solution_p.bin")
    write_json(out / "solve_summary.json", {
        "iterations": sol.iterations,
        "converged": bool(sol.converged),
        "final_residual": float(sol.residual_history[-1]),
        "divergence_max": float(divergence_max(sol.u)),
        "amplitude": float(sol.amplitude),
    })
    if not sol.converged:
        log.warning("Picard iteration did not converge in %d iterations", sol.iterations)


def task_expand(cfg: RunConfig, out: Path) -> bool:
    rep, rows = expansion_scan(cfg.forcing, cfg.params)
    write_json(out / "expansion_report.json", rep.to_dict())
    _write_rows(out / "remainder_scan.csv", rows)
    return rep.passed


def task_verify(cfg: RunConfig, out: Path, claim_id: str) -> bool:
    t0 = time.perf_counter()
    rep = run_claim(claim_id, cfg.params, cfg.forcing, cfg.seed)
    write_json(out / f"verify_{claim_id}.json", rep.to_dict())
    log.info("%s: %s in %.1f s", claim_id, "pass" if rep.passed else "FAIL", time.perf_counter() - t0)
    if not rep.passed:
        log.error("claim %s failed: %s", claim_id, ", ".join(rep.failures()))
    _write_summary(out)
    return rep.passed


def _load_reports(out: Path) -> dict:
    reps = {}
    for fp in sorted(out.glob("verify_*.json")):
        if fp.name == "verify_summary.json":
            continue
        d = json.loads(fp.read_text())
        reps[d["claim_id"]] = d
    return reps


def _write_summary(out: Path) -> None:
    reps = _load_reports(out)
    n_pass = sum(bool(d["pass"]) for d in reps.values())
    write_json(out / "verify_summary.json", {
        "claims": {k: bool(d["pass"]) for k, d in reps.items()},
        "passed": n_pass,
        "failed": len(reps) - n_pass,
        "total": len(reps),
    })


def _exponent(reps, claim, key):
    d = reps.get(claim)
    if d is None:
        return None
    if key.startswith("info:"):
        return d["info"].get(key[5:])
    if key.startswith("min:"):
        vals = [v for k, v in d["measured"].items() if k.startswith(key[4:] + "[")]
        return min(vals) if vals else None
    return d["measured"].get(key)


def report(out: Path) -> Path:
    """Write summary.md from the verify reports in ``out``."""
    reps = _load_reports(out)
    exp_path = out / "expansion_report.json"
    if not reps and not exp_path.exists():
        raise ConfigError(f"no run artifacts in {out}")
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    lines = ["# Verification summary", "", f"generated: {stamp}", "",
             "| claim | property | pass |", "|---|---|---|"]
    for cid, d in reps.items():
        desc = (CLAIMS[cid][0] if cid in CLAIMS else "").replace("|", "\\|")
        lines.append(f"| {cid} | {desc} | {'✓' if d['pass'] else '✗'} |")
    lines += ["", "| quantity | fitted exponent | claimed rate |", "|---|---|---|"]
    for cid, key, label, rate in RATES:
        v = _exponent(reps, cid, key)
        label = label.replace("|", "\\|")
        lines.append(f"| {label} | {json.dumps(v) if v is not None else 'not run'} | {rate} |")
    if exp_path.exists():
        e = json.loads(exp_path.read_text())
        lines += ["", f"expansion_report.json: c_f = {json.dumps(e['c_f'])}, pass = {e['pass']}"]
    path = out / "summary.md"
    path.write_text("\n".join(lines) + "\n")
    return path


# --------------------------------------------------------------------------


def run(cfg: RunConfig) -> int:
    out = cfg.output_dir
    failed = []
    for t in cfg.tasks:
        log.info("task %s", t)
        if t == "kernels":
            task_kernels(cfg, out)
        elif t == "solve":
            task_solve(cfg, out)
        elif t == "expand":
            if not task_expand(cfg, out):
                failed.append("expand")
        elif t == "verify_all":
            failed += [cid for cid in CLAIMS if not task_verify(cfg, out, cid)]
        elif t.startswith("verify:"):
            cid = t.split(":", 1)[1]
            if not task_verify(cfg, out, cid):
                failed.append(cid)
        elif t == "report":
            report(out)
    if failed:
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="tpflow", description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, help="JSON run configuration")
    ap.add_argument("--task", help="run this task instead of the configured ones")
    ap.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as e:
                raise ConfigError(f"cannot read config: {e}") from None
            cfg = parse_config(text)
        else:
            cfg = RunConfig()
        if args.task:
            _check_task("", args.task)
            cfg.tasks = [args.task]
        if args.out is not None:
            cfg.output_dir = args.out
        if cfg.output_dir is None:
            raise ConfigError("config key 'output_dir' missing (and no --out given)")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        try:
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"config key 'output_dir': cannot create {cfg.output_dir}: {e}") from None
        set_threads(args.threads)
        return run(cfg)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except FloatingPointError as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
