"""``icdisp`` command line: analyze, region, simulate, verify.

Every command reads a JSON config (units: nats) and writes its outputs into
``--out`` (default: the current directory). Exit codes: 0 success, 1 a
verification check failed, 2 bad config, 3 a runtime precondition failed.

Config schema (version 1)::

    {
      "schema_version": 1,
      "channel": {"h11": 1, "h12": 4, "h21": 3, "h22": 1, "p1": 1, "p2": 1},
      "seed": 0,
      "target": {"kappa1": "corner" | float, "kappa2": "corner" | float, "epsilon": 0.1},
      "region": {"grid": 201, "clip": 1e-14},
      "simulate": {"n_list": [100, 200, 400], "trials": 100000,
                   "point": {"l1": -1.0, "l2": -1.0},   # optional, default: balanced boundary point
                   "k": null},                           # optional, default: numeric estimate x 2
      "verify": {"conditional_n": 100, "conditional_trials": 20000, "u_draws": 200000,
                 "vd_n": 200, "vd_trials": 20000, "ratio_n": [50, 100], "ratio_samples": 10000,
                 "vd_perturbation": null}                # test hook: {"entry": [i, j], "delta": 1e-3}
    }

Only ``channel`` is required; command-specific blocks fall back to the
defaults shown. ``"corner"`` stands for the matching capacity ``I11``/``I21``.

Outputs: ``analyze.json``; ``region.csv`` (columns ``l1,l2``) and
``region.svg``; ``simulate.csv`` (columns ``n, achievability_estimate,
achievability_stderr, converse_estimate, converse_stderr,
theorem_prediction``); ``verify.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic_bounds, densities, fbl, region
from .channel import (
    ChannelParams,
    UnsupportedRegimeError,
    alphas,
    capacity_region_vertices,
    classify_regime,
    first_order,
    second_order,
    tau_jacobian,
    u_covariance,
    vd_from_matrices,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --- config -----------------------------------------------------------------

REGION_DEFAULTS = {"grid": 201, "clip": region.TRACE_CLIP}
SIMULATE_DEFAULTS = {"n_list": [100, 200, 400], "trials": 100_000, "point": None, "k": None}
VERIFY_DEFAULTS = {
    "conditional_n": 100, "conditional_trials": 20_000, "u_draws": 200_000, "vd_n": 200,
    "vd_trials": 20_000, "ratio_n": [50, 100], "ratio_samples": 10_000, "vd_perturbation": None,
}


def _number(value, path: str, *, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {json.dumps(value)}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if integer and int(value) != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be at least {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _block(raw: dict, key: str, defaults: dict) -> dict:
    block = raw.get(key, {})
    if not isinstance(block, dict):
        raise ConfigError(f"{key}: expected an object")
    unknown = sorted(set(block) - set(defaults))
    if unknown:
        raise ConfigError(f"{key}.{unknown[0]}: unknown field")
    return {**defaults, **block}


@dataclass
class RunConfig:
    channel: ChannelParams
    seed: int = 0
    target: dict | None = None
    region: dict = field(default_factory=lambda: dict(REGION_DEFAULTS))
    simulate: dict = field(default_factory=lambda: dict(SIMULATE_DEFAULTS))
    verify: dict = field(default_factory=lambda: dict(VERIFY_DEFAULTS))

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "channel": self.channel.to_dict(),
            "seed": self.seed,
            "region": dict(self.region),
            "simulate": dict(self.simulate),
            "verify": dict(self.verify),
        }
        if self.target is not None:
            out["target"] = dict(self.target)
        return out

    def target_point(self) -> region.TargetPoint:
        if self.target is None:
            raise ConfigError("target: required for this command")
        fo = first_order(self.channel)
        k1 = fo.i11 if self.target["kappa1"] == "corner" else self.target["kappa1"]
        k2 = fo.i21 if self.target["kappa2"] == "corner" else self.target["kappa2"]
        return region.TargetPoint(k1, k2, self.target["epsilon"])


def parse_config(raw) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = sorted(set(raw) - {"schema_version", "channel", "seed", "target", "region", "simulate", "verify"})
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown field")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")

    ch_raw = raw.get("channel")
    if not isinstance(ch_raw, dict):
        raise ConfigError("channel: required object")
    names = ("h11", "h12", "h21", "h22", "p1", "p2")
    for name in sorted(set(ch_raw) - set(names)):
        raise ConfigError(f"channel.{name}: unknown field")
    vals = {}
    for name in names:
        if name not in ch_raw:
            raise ConfigError(f"channel.{name}: missing")
        vals[name] = _number(ch_raw[name], f"channel.{name}", positive=True)
    channel = ChannelParams(**vals)

    seed = _number(raw.get("seed", 0), "seed", integer=True, minimum=0)

    target = None
    if "target" in raw:
        t = raw["target"]
        if not isinstance(t, dict):
            raise ConfigError("target: expected an object")
        for name in sorted(set(t) - {"kappa1", "kappa2", "epsilon"}):
            raise ConfigError(f"target.{name}: unknown field")
        target = {}
        for name in ("kappa1", "kappa2"):
            v = t.get(name, "corner")
            target[name] = v if v == "corner" else _number(v, f"target.{name}", minimum=0)
        if "epsilon" not in t:
            raise ConfigError("target.epsilon: missing")
        eps = _number(t["epsilon"], "target.epsilon")
        if not 0 < eps < 1:
            raise ConfigError("target.epsilon: must lie in (0, 1)")
        target["epsilon"] = eps

    reg = _block(raw, "region", REGION_DEFAULTS)
    reg["grid"] = _number(reg["grid"], "region.grid", integer=True, minimum=2)
    reg["clip"] = _number(reg["clip"], "region.clip", positive=True)

    sim = _block(raw, "simulate", SIMULATE_DEFAULTS)
    if not isinstance(sim["n_list"], list) or not sim["n_list"]:
        raise ConfigError("simulate.n_list: expected a nonempty list")
    sim["n_list"] = [_number(n, f"simulate.n_list[{i}]", integer=True, minimum=2)
                     for i, n in enumerate(sim["n_list"])]
    sim["trials"] = _number(sim["trials"], "simulate.trials", integer=True, minimum=1)
    if sim["point"] is not None:
        p = sim["point"]
        if not isinstance(p, dict) or set(p) != {"l1", "l2"}:
            raise ConfigError("simulate.point: expected {\"l1\": ..., \"l2\": ...}")
        sim["point"] = {k: _number(p[k], f"simulate.point.{k}") for k in ("l1", "l2")}
    if sim["k"] is not None:
        sim["k"] = _number(sim["k"], "simulate.k", minimum=0)

    ver = _block(raw, "verify", VERIFY_DEFAULTS)
    for key in ("conditional_n", "vd_n"):
        ver[key] = _number(ver[key], f"verify.{key}", integer=True, minimum=2)
    for key in ("conditional_trials", "vd_trials", "u_draws", "ratio_samples"):
        ver[key] = _number(ver[key], f"verify.{key}", integer=True, minimum=1000)
    if not isinstance(ver["ratio_n"], list):
        raise ConfigError("verify.ratio_n: expected a list")
    ver["ratio_n"] = [_number(n, f"verify.ratio_n[{i}]", integer=True, minimum=10)
                      for i, n in enumerate(ver["ratio_n"])]
    for i, n in enumerate(ver["ratio_n"]):
        if n % 2:
            raise ConfigError(f"verify.ratio_n[{i}]: must be even")
    pert = ver["vd_perturbation"]
    if pert is not None:
        if not isinstance(pert, dict) or set(pert) != {"entry", "delta"}:
            raise ConfigError("verify.vd_perturbation: expected {\"entry\": [i, j], \"delta\": d}")
        entry = pert["entry"]
        if not (isinstance(entry, list) and len(entry) == 2
                and all(isinstance(e, int) and 0 <= e < 4 for e in entry)):
            raise ConfigError("verify.vd_perturbation.entry: expected two indices in 0..3")
        ver["vd_perturbation"] = {"entry": list(entry),
                                  "delta": _number(pert["delta"], "verify.vd_perturbation.delta")}

    return RunConfig(channel=channel, seed=seed, target=target, region=reg, simulate=sim, verify=ver)


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return parse_config(raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


# --- emitters ---------------------------------------------------------------


def fmt(x) -> str:
    return "%.17g" % x


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    path.write_bytes(buf.getvalue().encode("ascii"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def region_svg(points, spec: region.RegionSpec, size: int = 480) -> str:
    """Self-contained SVG 1.1 plot of a boundary curve with the region shaded.

    Both axes share one scale, so a curve symmetric under ``l1 <-> l2`` is drawn
    symmetric about the diagonal.
    """
    l1 = np.array([p.l1 for p in points])
    l2 = np.array([p.l2 for p in points])
    lo = float(min(l1.min(), l2.min()))
    hi = float(max(l1.max(), l2.max()))
    pad = 0.08 * (hi - lo) if hi > lo else 1.0
    lo, hi = lo - pad, hi + pad
    margin = 60
    span = size - 2 * margin

    def sx(v):
        return margin + (v - lo) / (hi - lo) * span

    def sy(v):
        return size - margin - (v - lo) / (hi - lo) * span

    curve = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(l1, l2))
    if spec.case is region.RegionCase.CORNER:
        # region lies below and to the left of the curve
        shade = f"{sx(l1[0]):.3f},{sy(lo):.3f} {curve} {sx(lo):.3f},{sy(l2[-1]):.3f} {sx(lo):.3f},{sy(lo):.3f}"
    elif spec.case is region.RegionCase.VERTICAL:
        shade = f"{sx(lo):.3f},{sy(lo):.3f} {sx(l1[0]):.3f},{sy(lo):.3f} {sx(l1[0]):.3f},{sy(hi):.3f} {sx(lo):.3f},{sy(hi):.3f}"
    else:
        shade = f"{sx(lo):.3f},{sy(lo):.3f} {sx(hi):.3f},{sy(lo):.3f} {sx(hi):.3f},{sy(l2[0]):.3f} {sx(lo):.3f},{sy(l2[0]):.3f}"

    ticks = []
    for v in np.linspace(lo, hi, 5):
        ticks.append(f'<text x="{sx(v):.3f}" y="{size - margin + 18}" text-anchor="middle">{v:.2f}</text>')
        ticks.append(f'<text x="{margin - 8}" y="{sy(v) + 4:.3f}" text-anchor="end">{v:.2f}</text>')
    axes = []
    if lo < 0 < hi:
        axes.append(f'<line x1="{sx(0):.3f}" y1="{margin}" x2="{sx(0):.3f}" y2="{size - margin}" stroke="#999" stroke-dasharray="4 3"/>')
        axes.append(f'<line x1="{margin}" y1="{sy(0):.3f}" x2="{size - margin}" y2="{sy(0):.3f}" stroke="#999" stroke-dasharray="4 3"/>')
    title = f"{spec.case.value} region, epsilon = {spec.epsilon:g}"
    return "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="11">',
        f"<title>{title}</title>",
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="white" stroke="black"/>',
        f'<polygon points="{shade}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>',
        *axes,
        f'<polyline points="{curve}" fill="none" stroke="#08519c" stroke-width="2"/>',
        *ticks,
        f'<text x="{size / 2}" y="{size - 15}" text-anchor="middle">L1 (nats/sqrt(use))</text>',
        f'<text x="18" y="{size / 2}" text-anchor="middle" transform="rotate(-90 18 {size / 2})">'
        "L2 (nats/sqrt(use))</text>",
        f'<text x="{size / 2}" y="30" text-anchor="middle" font-size="13">{title}</text>',
        "</svg>",
        "",
    ])


# --- commands ---------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, out: Path, threads=None) -> tuple[int, dict]:
    ch = cfg.channel
    reg = classify_regime(ch)
    fo = first_order(ch)
    so = second_order(ch)
    try:
        rect = capacity_region_vertices(ch)
    except UnsupportedRegimeError:
        rect = None
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "channel": ch.to_dict(),
        "regime": reg.tag.value,
        "slack1": reg.slack1,
        "slack2": reg.slack2,
        "first_order": {"I11": fo.i11, "I21": fo.i21, "I12": fo.i12, "I22": fo.i22},
        "V1": so.v1,
        "V2": so.v2,
        "Vd": so.vd,
        "alphas": so.alphas.to_dict(),
        "capacity_rectangle": rect,
    }
    write_json(out / "analyze.json", report)
    return EXIT_OK, report


def cmd_region(cfg: RunConfig, out: Path, threads=None) -> tuple[int, dict]:
    spec = region.classify_target(cfg.channel, cfg.target_point())
    report = {"schema_version": SCHEMA_VERSION, "command": "region", "case": spec.case.value,
              "epsilon": spec.epsilon, "v1": spec.v1, "v2": spec.v2}
    if spec.case in (region.RegionCase.INTERIOR, region.RegionCase.EXTERIOR):
        report["region"] = "all" if spec.case is region.RegionCase.INTERIOR else "empty"
        write_json(out / "region.json", report)
        return EXIT_OK, report
    grid = cfg.region["grid"]
    if spec.case is region.RegionCase.CORNER:
        points = region.trace_boundary(spec, grid, cfg.region["clip"]).points
    else:
        # half-plane: boundary is a line, drawn over +-4 standard deviations of the free coordinate
        if spec.case is region.RegionCase.VERTICAL:
            edge = region.second_order_rate(spec.v1, spec.epsilon)
            free = np.linspace(-4 * math.sqrt(spec.v2), 4 * math.sqrt(spec.v2), grid)
            points = [region.SecondOrderPoint(edge, float(v)) for v in free]
        else:
            edge = region.second_order_rate(spec.v2, spec.epsilon)
            free = np.linspace(-4 * math.sqrt(spec.v1), 4 * math.sqrt(spec.v1), grid)
            points = [region.SecondOrderPoint(float(v), edge) for v in free]
    write_csv(out / "region.csv", ("l1", "l2"), ((p.l1, p.l2) for p in points))
    (out / "region.svg").write_text(region_svg(points, spec))
    report["points"] = len(points)
    write_json(out / "region.json", report)
    return EXIT_OK, report


def cmd_simulate(cfg: RunConfig, out: Path, threads=None) -> tuple[int, dict]:
    ch = cfg.channel
    tp = cfg.target_point()
    spec = region.classify_target(ch, tp)
    sim = cfg.simulate
    if sim["point"] is None:
        pt = region.balanced_boundary_point(spec)
    else:
        pt = region.SecondOrderPoint(sim["point"]["l1"], sim["point"]["l2"])
    rows = fbl.second_order_experiment(ch, tp, pt, sim["n_list"], sim["trials"], cfg.seed,
                                       k=sim["k"], threads=threads)
    write_csv(out / "simulate.csv", fbl.ExperimentRow.COLUMNS, (r.as_tuple() for r in rows))
    report = {"schema_version": SCHEMA_VERSION, "command": "simulate", "l1": pt.l1, "l2": pt.l2,
              "rows": len(rows)}
    return EXIT_OK, report


def _within(est, se, target, k=4.0):
    z = np.abs(np.asarray(est) - np.asarray(target)) / np.maximum(np.asarray(se), 1e-300)
    return bool(np.all(z <= k)), float(np.max(z))


def verification_checks(cfg: RunConfig, threads=None) -> list[dict]:
    ch = cfg.channel
    seed = cfg.seed
    ver = cfg.verify
    fo = first_order(ch)
    so = second_order(ch)
    a = alphas(ch)
    checks = []

    def add(name, passed, **stats):
        checks.append({"name": name, "passed": bool(passed), "seed": seed, **stats})

    # conditional statistics at a fixed codeword pair
    n = ver["conditional_n"]
    cw = densities.fixed_codewords(ch, n, 1)
    st = densities.empirical_stats(ch, n, ver["conditional_trials"], seed, codewords=cw, threads=threads)
    ok, z = _within(st.mean[:2], st.mean_se[:2], fo.ic)
    add("conditional_mean", ok, max_abs_z=z, n=n, trials=st.trials)
    ok, z = _within(st.cov[:2, :2], st.cov_se[:2, :2], so.vc)
    add("conditional_covariance", ok, max_abs_z=z, n=n, trials=st.trials)

    # single-letter U-vector covariance
    u = densities.u_samples(ch, ver["u_draws"], seed, threads=threads)
    cov, se = densities.covariance_with_se(u)
    iu = np.triu_indices(10)
    ok, z = _within(cov[iu], se[iu], u_covariance(a)[iu])
    add("u_covariance", ok, max_abs_z=z, draws=u.shape[0])

    # Jacobian of tau at the origin by central differences
    h = 1e-6
    jac = np.empty((4, 10))
    for j in range(10):
        e = np.zeros(10)
        e[j] = h
        jac[:, j] = (densities.tau(e, a) - densities.tau(-e, a)) / (2 * h)
    err = float(np.max(np.abs(jac - tau_jacobian(a))))
    add("tau_jacobian", err <= 1e-6, max_abs_error=err)

    # Vd: closed form against the matrix product, then against simulation
    vd = so.vd.copy()
    pert = ver["vd_perturbation"]
    if pert is not None:
        i, j = pert["entry"]
        vd[i, j] += pert["delta"]
    algebra_err = float(np.max(np.abs(vd - vd_from_matrices(a))))
    n = ver["vd_n"]
    st = densities.empirical_stats(ch, n, ver["vd_trials"], seed, threads=threads)
    ok_mc, z = _within(st.cov, st.cov_se, vd)
    add("vd_match", ok_mc and algebra_err <= 1e-10, max_abs_z=z, algebra_error=algebra_err,
        n=n, trials=st.trials)

    for rx in (1, 2):
        r = analytic_bounds.scan_phi(ch, rx)
        add(f"phi_scan_rx{rx}", r.max_value <= 1e-10 and abs(r.argmax - r.extra["expected_argmax"]) <= 1e-3,
            max_value=r.max_value, argmax=r.argmax, expected_argmax=r.extra["expected_argmax"])
        r = analytic_bounds.scan_rho(ch, rx)
        add(f"rho_scan_rx{rx}", r.max_value <= 1e-10 and abs(r.argmax - r.extra["expected_argmax"]) <= 1e-3,
            max_value=r.max_value, argmax=r.argmax, expected_argmax=r.extra["expected_argmax"])
    for n in ver["ratio_n"]:
        r = analytic_bounds.finite_n_ratio_check(ch, n, ver["ratio_samples"], seed)
        add(f"d11_bound_n{n}", r.violation_count == 0, violations=r.violation_count,
            max_log_ratio=r.max_value, min_slack=r.extra["min_slack"])
    return checks


def cmd_verify(cfg: RunConfig, out: Path, threads=None) -> tuple[int, dict]:
    checks = verification_checks(cfg, threads)
    passed = all(c["passed"] for c in checks)
    report = {"schema_version": SCHEMA_VERSION, "command": "verify", "seed": cfg.seed,
              "passed": passed, "checks": checks}
    write_json(out / "verify.json", report)
    return (EXIT_OK if passed else EXIT_VERIFY), report


COMMANDS = {"analyze": cmd_analyze, "region": cmd_region, "simulate": cmd_simulate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icdisp", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="path to the JSON config")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $ICDISP_THREADS or 1)")
    p.add_argument("--out", default=".", help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be nonnegative")
            cfg.seed = args.seed
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads: must be at least 1")
    except ConfigError as exc:
        print(f"icdisp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"icdisp: cannot create output directory {out}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, report = COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        print(f"icdisp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedRegimeError, fbl.InsufficientTrialsError, ValueError) as exc:
        print(f"icdisp: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps(_jsonable(report), sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
