"""Experiment runners behind the CLI.

Every runner takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport`.  Cases are independent; a case that raises is
recorded with its error and the sweep continues.  Each asserted inequality
stores its slack ``eps`` and a signed ``margin`` (``>= 0`` means it holds).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bodies as cb
from .concavity import (
    LogField,
    check_laplacian_sign,
    check_midpoint_logconcavity,
    check_starshaped_gradient,
    check_strong_logconcavity,
)
from .config import ConfigError, ExperimentConfig, load_config
from .gauss import gaussian_measure, halfspace_offset_for_measure
from .grid import assemble, converged_eigenvalue, rayleigh_quotient, solve_body, write_eigenfunction_csv
from .legendre import (
    hessian_conjugate_check,
    random_spd,
    sup_convolution_direct,
    sup_convolution_fast,
    trace_inverse_convexity,
)
from .shooting import solve_halfline, solve_interval, solve_radial

__all__ = [
    "ExperimentReport",
    "RUNNERS",
    "run_experiment",
    "run_suite",
    "write_report",
    "report_json",
    "cases_csv",
]

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    cases: list[dict] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        errors = sum(1 for c in self.cases if "error" in c)
        failures = sum(1 for c in self.cases if not c.get("pass", False) and "error" not in c)
        margins = [c["margin"] for c in self.cases if c.get("asserted", True) and "margin" in c]
        return {
            "cases": len(self.cases),
            "failures": failures,
            "errors": errors,
            "worst_margin": min(margins) if margins else None,
        }

    @property
    def exit_code(self) -> int:
        s = self.summary
        if s["errors"]:
            return EXIT_ERROR
        return EXIT_FAIL if s["failures"] else EXIT_OK

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "config": self.config, "cases": self.cases,
                "summary": self.summary}


def _budget(cfg: ExperimentConfig, body):
    lam, b = converged_eigenvalue(body, cfg.spacings(body), cfg.tol, cfg.safety)
    return lam, b


def _combine(t, b0, b1):
    return cb.minkowski_combine(t, b0, b1)


# ---------------------------------------------------------------- bm-sweep

def _bm_specs(cfg):
    return [(a, b, t) for a, b in cfg.params.get("pairs", []) for t in cfg.params.get("t", [0.5])]


def _bm_case(cfg, spec):
    n0, n1, t = spec
    b0, b1 = cfg.body(n0), cfg.body(n1)
    l0, e0 = _budget(cfg, b0)
    l1, e1 = _budget(cfg, b1)
    lt, et = _budget(cfg, _combine(t, b0, b1))
    rhs = (1 - t) * l0 + t * l1
    eps = e0.eps + e1.eps + et.eps
    return {
        "bodies": [n0, n1], "t": t, "lambda_0": l0, "lambda_1": l1, "lambda_t": lt, "rhs": rhs,
        "deficit": rhs - lt, "eps": eps, "eps_parts": [e0.eps, e1.eps, et.eps],
        "order_t": et.order, "margin": rhs + eps - lt, "pass": lt <= rhs + eps,
    }


# ---------------------------------------------------------------- supconv

def _supconv_specs(cfg):
    specs = [("chain", a, b, t) for a, b in cfg.params.get("pairs", []) for t in cfg.params.get("t", [0.5])]
    specs += [("oracle", a, b, t) for a, b in cfg.params.get("oracle_pairs", [])
              for t in cfg.params.get("t", [0.5])]
    return specs


def _supconv_case(cfg, spec):
    kind, n0, n1, t = spec
    b0, b1 = cfg.body(n0), cfg.body(n1)
    bt = _combine(t, b0, b1)
    if kind == "oracle":
        if b0.dim != 1:
            raise ConfigError("oracle pairs must be 1D")
        h = float(cfg.params.get("oracle_h", 2.0 / 42))
        tol = float(cfg.params.get("oracle_tol", 1e-3))
        r0, r1, rt = solve_body(b0, h, cfg.tol), solve_body(b1, h, cfg.tol), solve_body(bt, h, cfg.tol)
        fast = sup_convolution_fast(r0.u, r1.u, t, rt.u.grid)
        exact = sup_convolution_direct(r0.u, r1.u, t, rt.u.grid, interpolate=True)
        window = sup_convolution_direct(r0.u, r1.u, t, rt.u.grid)
        pos = exact.values > 0
        rel = float(np.max(np.abs(fast.values[pos] - exact.values[pos]) / exact.values[pos]))
        wpos = window.values > 0
        wrel = float(np.max(np.abs(fast.values[wpos] - window.values[wpos]) / window.values[wpos]))
        return {
            "kind": "oracle", "bodies": [n0, n1], "t": t, "h": h,
            "nodes": [r0.u.grid.size, r1.u.grid.size, rt.u.grid.size],
            "rel_diff": rel, "rel_diff_window": wrel, "eps": tol,
            "margin": tol - rel, "pass": rel <= tol,
        }
    l0, e0 = _budget(cfg, b0)
    l1, e1 = _budget(cfg, b1)
    _, et = _budget(cfg, bt)
    h0, h1, ht = cfg.spacings(b0)[-1], cfg.spacings(b1)[-1], cfg.spacings(bt)[-1]
    r0, r1, rt = solve_body(b0, h0, cfg.tol), solve_body(b1, h1, cfg.tol), solve_body(bt, ht, cfg.tol)
    ut = sup_convolution_fast(r0.u, r1.u, t, rt.u.grid)
    R = rayleigh_quotient(assemble(rt.u.grid), ut)
    rhs = (1 - t) * l0 + t * l1
    eps = e0.eps + e1.eps + et.eps
    m1 = rhs + eps - R
    m2 = R + eps - rt.lam
    return {
        "kind": "chain", "bodies": [n0, n1], "t": t, "h": ht, "lambda_0": l0, "lambda_1": l1,
        "lambda_t": rt.lam, "rayleigh_t": R, "rhs": rhs, "deficit": rhs - rt.lam, "eps": eps,
        "margin_rayleigh": m1, "margin_eigen": m2, "margin": min(m1, m2), "pass": m1 >= 0 and m2 >= 0,
    }


# ---------------------------------------------------------------- faber-krahn

def _fk_case(cfg, name):
    body = cfg.body(name)
    lam, bud = _budget(cfg, body)
    mass = gaussian_measure(body, float(cfg.params.get("resolution", 0.005)))
    a = halfspace_offset_for_measure(mass)
    half = solve_halfline(a, T=float(cfg.params.get("T", 8.0)))
    eps = bud.eps + half.extra["truncation_delta"]
    return {
        "body": name, "dim": body.dim, "lambda": lam, "mass": mass, "offset": a, "lambda_half": half.lam,
        "eps": eps, "margin": lam - half.lam + eps, "pass": lam >= half.lam - eps,
    }


# ---------------------------------------------------------------- urysohn

def _urysohn_specs(cfg):
    specs = [("ball", n) for n in cfg.params.get("bodies", [])]
    specs += [("rotations", n) for n in cfg.params.get("track", [])]
    return specs


def _urysohn_case(cfg, spec):
    kind, name = spec
    body = cfg.body(name)
    if body.dim != 2:
        raise ConfigError(f"urysohn needs 2D bodies, {name!r} is {body.dim}D")
    R = 0.5 * cb.mean_width(body)
    ball = solve_radial(2, R)
    if kind == "ball":
        lam, bud = _budget(cfg, body)
        return {
            "kind": "ball", "body": name, "mean_width": 2 * R, "lambda": lam, "lambda_ball": ball.lam,
            "eps": bud.eps, "margin": lam - ball.lam + bud.eps, "pass": lam >= ball.lam - bud.eps,
        }
    target = cb.Ball(R)
    seq = []
    for m in cfg.params.get("rotations", [1, 2, 4, 8, 16]):
        bm = cb.rotation_mean(body, [2 * math.pi * k / m for k in range(m)])
        lam, bud = _budget(cfg, bm)
        seq.append({"m": m, "lambda": lam, "eps": bud.eps, "hausdorff": cb.hausdorff_distance(bm, target)})
    steps = [b["lambda"] - a["lambda"] - (a["eps"] + b["eps"]) for a, b in zip(seq, seq[1:])]
    mono = -max(steps) if steps else 0.0
    ratio = seq[-1]["hausdorff"] / seq[0]["hausdorff"] if seq[0]["hausdorff"] > 0 else 0.0
    floor = [s["lambda"] - ball.lam + s["eps"] for s in seq]
    return {
        "kind": "rotations", "body": name, "mean_width": 2 * R, "lambda_ball": ball.lam, "sequence": seq,
        "monotone_margin": mono, "hausdorff_ratio": ratio, "eps": max(s["eps"] for s in seq),
        "margin": min(mono, 0.25 - ratio, min(floor)),
        "pass": mono >= 0 and ratio < 0.25 and min(floor) >= 0,
    }


# ---------------------------------------------------------------- logconc

def _smooth_symmetric(body) -> bool:
    return isinstance(body, (cb.Interval, cb.Ball, cb.SmoothBody)) and cb.is_origin_symmetric(body, tol=1e-9)


def _logconc_case(cfg, name):
    body = cfg.body(name)
    h = cfg.spacings(body)[-1]
    res = solve_body(body, h, cfg.tol)
    u = res.u
    tau = float(cfg.params.get("tau", 0.01))
    tol = float(cfg.params.get("tol_factor", 10.0)) * h * h
    layers = int(cfg.params.get("boundary_layers", 5))
    mid = check_midpoint_logconcavity(u, tau, tol=tol, seed=cfg.seed)
    strong = check_strong_logconcavity(u, tau, boundary_layers=layers)
    lap = check_laplacian_sign(u, tau)
    star = check_starshaped_gradient(u, tau)
    asserted = _smooth_symmetric(body)
    rec = {
        "body": name, "h": h, "lambda": res.lam, "tau": tau, "tol": tol, "symmetric_smooth": asserted,
        "midpoint_violations": mid.violations, "midpoint_margin": mid.margin, "midpoint_pairs": mid.samples,
        "strong_margin": strong.margin, "laplacian_max": lap.margin, "radial_max": star.margin,
    }
    ok = mid.violations == 0
    margin = mid.margin + tol
    if asserted:
        ok = ok and strong.margin > 0 and lap.margin < 0 and star.margin <= tol
        margin = min(margin, strong.margin, -lap.margin, tol - star.margin)
        hcfg = float(cfg.params.get("hessian_tau", 0.3))
        hh = float(cfg.params.get("hessian_h", h))
        hres = res if hh == h else solve_body(body, hh, cfg.tol)
        chk = hessian_conjugate_check(LogField(hres.u, hcfg, boundary_layers=layers), seed=cfg.seed)
        rec["hessian_conjugate_deviation"] = chk["max_deviation"]
        rec["hessian_conjugate_samples"] = chk["samples"]
    if cfg.params.get("_dump"):
        write_eigenfunction_csv(u, Path(cfg.params["_dump"]) / f"eigenfunction_{name}.csv")
    rec.update({"margin": margin, "pass": bool(ok)})
    return rec


# ---------------------------------------------------------------- equality-probe

def _eq_specs(cfg):
    ts = cfg.params.get("t", [0.5])
    specs = [("symmetric", a, b, t) for a, b in cfg.params.get("pairs", []) for t in ts]
    specs += [("translate", a, b, t) for a, b in cfg.params.get("translate", []) for t in ts]
    return specs


def _oracle_lambda(body):
    if isinstance(body, cb.Interval):
        return solve_interval(body.a, body.b).lam
    return None


def _eq_case(cfg, spec):
    kind, n0, n1, t = spec
    b0, b1 = cfg.body(n0), cfg.body(n1)
    l0, e0 = _budget(cfg, b0)
    l1, e1 = _budget(cfg, b1)
    lt, et = _budget(cfg, _combine(t, b0, b1))
    rhs = (1 - t) * l0 + t * l1
    deficit = rhs - lt
    eps = e0.eps + e1.eps + et.eps
    dist = cb.hausdorff_distance(b0, b1)
    delta = float(cfg.params.get("delta", 0.1))
    rec = {"kind": kind, "bodies": [n0, n1], "t": t, "lambda_0": l0, "lambda_1": l1, "lambda_t": lt,
           "rhs": rhs, "deficit": deficit, "eps": eps, "hausdorff": dist}
    if b0.dim == 1:
        o = [_oracle_lambda(b) for b in (b0, b1, _combine(t, b0, b1))]
        if None not in o:
            rec["deficit_oracle"] = (1 - t) * o[0] + t * o[1] - o[2]
    if kind == "translate":
        rec.update({"asserted": False, "pass": True, "rule": "diagnostic"})
    elif b0 == b1:
        rec.update({"asserted": True, "rule": "identical", "margin": eps - abs(deficit),
                    "pass": abs(deficit) <= eps})
    elif dist >= delta and cb.is_origin_symmetric(b0) and cb.is_origin_symmetric(b1):
        rec.update({"asserted": True, "rule": "distinct", "margin": deficit - 3 * eps,
                    "pass": deficit > 3 * eps})
    else:
        rec.update({"asserted": False, "pass": True, "rule": "below-threshold"})
    return rec


# ---------------------------------------------------------------- matrix-lemma

def _matrix_specs(cfg):
    return ["hand", "equal", "random"]


def _matrix_case(cfg, kind):
    rng = np.random.default_rng(cfg.seed)
    if kind == "hand":
        lhs, rhs = trace_inverse_convexity(np.eye(2), np.diag([4.0, 1.0]), 0.5)
        err = max(abs(lhs - 2.6), abs(rhs - 3.5))
        return {"kind": kind, "lhs": lhs, "rhs": rhs, "eps": 1e-12, "margin": 1e-12 - err, "pass": err <= 1e-12}
    n_max = int(cfg.params.get("max_dim", 5))
    cond = float(cfg.params.get("cond", 1e3))
    if kind == "equal":
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, n_max + 1))
            A = random_spd(rng, n, cond)
            lhs, rhs = trace_inverse_convexity(A, A, float(rng.uniform()))
            worst = max(worst, abs(lhs - rhs) / rhs)
        return {"kind": kind, "samples": 100, "max_rel_gap": worst, "eps": 1e-12,
                "margin": 1e-12 - worst, "pass": worst <= 1e-12}
    samples = int(cfg.params.get("samples", 1000))
    worst, worst_rec, near = -math.inf, None, 0
    near_dist = 0.0
    for k in range(samples):
        n = int(rng.integers(1, n_max + 1))
        A, B = random_spd(rng, n, cond), random_spd(rng, n, cond)
        t = float(rng.uniform())
        lhs, rhs = trace_inverse_convexity(A, B, t)
        if lhs - rhs > worst:
            worst, worst_rec = lhs - rhs, {"index": k, "n": n, "t": t, "lhs": lhs, "rhs": rhs}
        if abs(lhs - rhs) <= 1e-9:
            near += 1
            near_dist = max(near_dist, float(np.linalg.norm(A - B)))
    return {"kind": kind, "samples": samples, "max_lhs_minus_rhs": worst, "worst": worst_rec,
            "near_equality": near, "near_equality_max_dist": near_dist, "eps": 1e-12,
            "margin": 1e-12 - worst, "pass": worst <= 1e-12}


RUNNERS = {
    "bm-sweep": (_bm_specs, _bm_case),
    "supconv": (_supconv_specs, _supconv_case),
    "faber-krahn": (lambda c: list(c.params.get("bodies", [])), _fk_case),
    "urysohn": (_urysohn_specs, _urysohn_case),
    "logconc": (lambda c: list(c.params.get("bodies", [])), _logconc_case),
    "equality-probe": (_eq_specs, _eq_case),
    "matrix-lemma": (_matrix_specs, _matrix_case),
}


def _case_id(spec) -> str:
    if isinstance(spec, (tuple, list)):
        return "/".join(str(s) for s in spec)
    return str(spec)


def _guarded(args):
    experiment, cfg, spec = args
    fn = RUNNERS[experiment][1]
    try:
        rec = fn(cfg, spec)
    except Exception as exc:  # a failing case never aborts the sweep
        rec = {"error": f"{type(exc).__name__}: {exc}", "pass": False}
    rec["case"] = _case_id(spec)
    return rec


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    specs = RUNNERS[cfg.experiment][0](cfg)
    jobs = [(cfg.experiment, cfg, s) for s in specs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            cases = list(pool.map(_guarded, jobs))  # map keeps case order
    else:
        cases = [_guarded(j) for j in jobs]
    return ExperimentReport(cfg.experiment, cfg.describe(), cases)


def run_suite(path, experiments, seed=None, jobs=None, dump=None) -> dict[str, ExperimentReport]:
    out = {}
    for name in experiments:
        cfg = load_config(path, name, seed=seed, jobs=jobs)
        if dump is not None:
            cfg.params["_dump"] = str(dump)
        out[name] = run_experiment(cfg)
    return out


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def report_json(reports: dict[str, ExperimentReport]) -> str:
    data = {"experiments": {k: r.to_dict() for k, r in reports.items()}}
    return json.dumps(_clean(data), indent=2, sort_keys=True) + "\n"


def cases_csv(reports: dict[str, ExperimentReport]) -> str:
    rows = []
    for name, rep in reports.items():
        for c in rep.cases:
            row = {"experiment": name}
            for k, v in _clean(c).items():
                row[k] = json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v
            rows.append(row)
    cols = ["experiment", "case"] + sorted({k for r in rows for k in r} - {"experiment", "case"})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def write_report(reports: dict[str, ExperimentReport], out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(reports))
    (out / "cases.csv").write_text(cases_csv(reports))
    return out / "report.json"


def exit_code(reports: dict[str, ExperimentReport]) -> int:
    codes = [r.exit_code for r in reports.values()]
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return EXIT_FAIL if EXIT_FAIL in codes else EXIT_OK
