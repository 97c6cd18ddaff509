"""Batch command-line front end: sweeps, reports and the acceptance suite.

Subcommands:
  stokes    wave/coefficient harmonic report per amplitude (JSON)
  spectrum  full eigenvalue tables per (mu, eps) point (CSV)
  bubble    growth-rate sweep with reduction cross-check (CSV + SVG locus)
  reduce    4x4 reduction matrices, determinant roots and fitted constants
  validate  run the acceptance suite and emit a machine-readable summary

Output files carry the full configuration for provenance.  CSV bodies are
deterministic for a fixed config and seed; timestamps and wall-clock
timings live in '#' comment lines, which are exempt from byte comparison.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import flat_spectrum, predict_lambda
from .bloch import assemble, spectrum
from .errors import NonConvergenceError, RootNotFoundError
from .pipeline import build_pipeline
from .reduction import (
    fit_characteristic_constants,
    kernel_basis,
    reduced_matrices,
    unstable_roots,
)
from .validation import format_report, run_all

THREAD_ENV = "STOKES_SPECTRA_THREADS"
MAX_AMPLITUDE = 0.2


@dataclass
class RunConfig:
    g: float = 1.0
    eps: list = field(default_factory=lambda: [0.05])
    mu: list = field(default_factory=lambda: [0.0005, 0.001, 0.0015, 0.002, 0.0025])
    K: int = 32
    stokes_order: int = 3
    sideband_method: str = "direct"
    neumann_order: int = 6
    refined: bool = True
    fixed_point_tol: float = 1e-12
    eigen_residual_tol: float = 1e-8
    newton_tol: float = 1e-12
    out_dir: str = "out"
    seed: int = 1234

    def validate(self, need_mu=True):
        for tol in (self.fixed_point_tol, self.eigen_residual_tol, self.newton_tol):
            if tol <= 0:
                raise ValueError("tolerances must be positive")
        if not self.eps:
            raise ValueError("empty amplitude list")
        for e in self.eps:
            if abs(e) > MAX_AMPLITUDE:
                raise ValueError(f"amplitude {e} outside |eps| <= {MAX_AMPLITUDE}")
        if need_mu:
            if not self.mu:
                raise ValueError("empty mu list")
            for m in self.mu:
                if not 0.0 < m < 0.5:
                    raise ValueError(f"mu = {m} outside (0, 1/2)")
        if self.stokes_order not in (1, 2, 3):
            raise ValueError("stokes_order must be 1, 2 or 3")
        if self.sideband_method not in ("direct", "neumann"):
            raise ValueError("sideband_method must be 'direct' or 'neumann'")
        if self.K < 4:
            raise ValueError("K too small")
        return self

    def as_dict(self):
        return asdict(self)


def _expand_mu(spec):
    """Accept a list of values or a {start, stop, count} range."""
    if isinstance(spec, dict):
        return list(np.linspace(spec["start"], spec["stop"], int(spec["count"])))
    return [float(m) for m in spec]


def load_config(path=None, overrides=None):
    cfg = RunConfig()
    if path:
        with open(path) as fh:
            raw = json.load(fh)
        for key, val in raw.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            if key == "mu":
                val = _expand_mu(val)
            if key == "eps":
                val = [float(e) for e in val]
            setattr(cfg, key, val)
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def fmt(x):
    """Full-precision decimal for lossless round-trips."""
    return f"{x:.17g}"


def _header_lines(cfg, extra=None):
    lines = [f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    for key, val in sorted(cfg.as_dict().items()):
        lines.append(f"# config {key}={val}")
    for line in extra or []:
        lines.append(f"# {line}")
    return lines


def write_csv(path, cfg, columns, rows, timing_lines=None):
    """Comment header (timestamp, config, timings), then a deterministic body."""
    body = [",".join(columns)]
    body += [",".join(row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(_header_lines(cfg, timing_lines) + body) + "\n")


def _pool_size(n_tasks):
    env = os.environ.get(THREAD_ENV)
    limit = int(env) if env else 4
    return max(1, min(limit, n_tasks))


def _sweep(points, worker):
    """Evaluate worker over (eps, mu) points on a bounded pool, sorted output."""
    results = {}
    n = _pool_size(len(points))
    if n == 1:
        for pt in points:
            results[pt] = worker(pt)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n) as pool:
            futures = {pool.submit(worker, pt): pt for pt in points}
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    return [results[pt] for pt in sorted(points)]


def _pipeline_for(cfg, eps):
    return build_pipeline(
        eps,
        g=cfg.g,
        K=cfg.K,
        order=cfg.stokes_order,
        refined=cfg.refined,
        fixed_point_tol=cfg.fixed_point_tol,
    )


def cmd_stokes(cfg):
    cfg.validate(need_mu=False)
    os.makedirs(cfg.out_dir, exist_ok=True)
    report = {"config": cfg.as_dict(), "waves": []}
    for eps in cfg.eps:
        data = _pipeline_for(cfg, eps)
        w = data.wave
        band = min(cfg.K, 8)
        entry = {
            "eps": eps,
            "speed": w.speed,
            "eta_cos": [w.eta.cos_coeff(k) for k in range(band + 1)],
            "psi_sin": [w.psi.sin_coeff(k) for k in range(1, band + 1)],
            "b_sin": [data.traces.B.sin_coeff(k) for k in range(1, band + 1)],
            "v_cos": [data.traces.V.cos_coeff(k) for k in range(band + 1)],
            "p_cos": [data.coeffs.p.cos_coeff(k) for k in range(band + 1)],
            "q_cos": [data.coeffs.q.cos_coeff(k) for k in range(band + 1)],
            "zeta_sin": [data.cmap.zeta_offset.sin_coeff(k) for k in range(1, band + 1)],
            "map_residual": data.cmap.residual,
        }
        report["waves"].append(entry)
    path = os.path.join(cfg.out_dir, "stokes.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
    print(f"wrote {path} ({len(cfg.eps)} amplitudes)")
    return 0


def cmd_spectrum(cfg):
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    coeff_cache = {}

    def worker(point):
        eps, mu = point
        t0 = time.perf_counter()
        if eps not in coeff_cache:
            coeff_cache[eps] = _pipeline_for(cfg, eps).coeffs
        rows = []
        err = ""
        try:
            vals = spectrum(
                assemble(mu, eps, cfg.K, coeff_cache[eps]),
                residual_tol=cfg.eigen_residual_tol,
            ).eigenvalues
        except NonConvergenceError as exc:
            vals = []
            err = str(exc)
        for idx, lam in enumerate(vals):
            rows.append(
                [fmt(mu), fmt(eps), str(idx), fmt(lam.real), fmt(lam.imag), err]
            )
        if err:
            rows.append([fmt(mu), fmt(eps), "-1", "nan", "nan", err])
        return rows, time.perf_counter() - t0

    # warm per-eps pipelines serially so threads only race on eigensolves
    for eps in cfg.eps:
        coeff_cache[eps] = _pipeline_for(cfg, eps).coeffs
    points = [(e, m) for e in cfg.eps for m in cfg.mu]
    out = _sweep(points, worker)
    rows = [r for block, _ in out for r in block]
    timings = [
        f"timing eps={pt[0]} mu={pt[1]} wall_s={dt:.3f}"
        for pt, (_, dt) in zip(sorted(points), out)
    ]
    path = os.path.join(cfg.out_dir, "spectrum.csv")
    write_csv(path, cfg, ["mu", "eps", "k_index", "re", "im", "error"], rows, timings)
    print(f"wrote {path} ({len(rows)} eigenvalues)")
    return 0


def _locus_svg(path, branches, slope, eps_labels):
    """Hand-rolled SVG: one polyline per amplitude plus the predicted ray."""
    width, height, margin = 640, 480, 60
    all_pts = [p for br in branches for p in br]
    if not all_pts:
        raise ValueError("no locus points to plot")
    xs = [p[0] for p in all_pts] + [0.0]
    ys = [p[1] for p in all_pts] + [0.0]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    xpad = 0.1 * (xmax - xmin or 1.0)
    ypad = 0.1 * (ymax - ymin or 1.0)
    xmin, xmax = xmin - xpad, xmax + xpad
    ymin, ymax = ymin - ypad, ymax + ypad

    def sx(x):
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{sx(xmin)}" y1="{sy(0)}" x2="{sx(xmax)}" y2="{sy(0)}" '
        'stroke="#888" stroke-width="1"/>',
        f'<line x1="{sx(0)}" y1="{sy(ymin)}" x2="{sx(0)}" y2="{sy(ymax)}" '
        'stroke="#888" stroke-width="1"/>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" '
        'font-size="14">Re lambda</text>',
        f'<text x="18" y="{height / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height / 2})">Im lambda</text>',
    ]
    colors = ["#0057b7", "#b00020", "#1a7a1a", "#7a1aa0"]
    for i, (branch, label) in enumerate(zip(branches, eps_labels)):
        pts = " ".join(f"{sx(p[0]):.2f},{sy(p[1]):.2f}" for p in branch)
        color = colors[i % len(colors)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        if branch:
            parts.append(
                f'<text x="{sx(branch[-1][0]) + 5:.2f}" y="{sy(branch[-1][1]):.2f}" '
                f'font-size="12" fill="{color}">eps={label}</text>'
            )
    # predicted ray Im = slope * Re through the origin
    x_end = xmax if slope * xmax <= ymax else ymax / slope
    parts.append(
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(x_end)}" y2="{sy(slope * x_end)}" '
        'stroke="#444" stroke-width="1" stroke-dasharray="6 4"/>'
    )
    parts.append(
        f'<text x="{sx(x_end)}" y="{sy(slope * x_end) - 8:.2f}" font-size="12" '
        'fill="#444">predicted slope</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def cmd_bubble(cfg):
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    state = {}

    def setup(eps):
        if eps not in state:
            data = _pipeline_for(cfg, eps)
            basis = kernel_basis(data.wave, data.cmap, data.coeffs, traces=data.traces)
            state[eps] = (data, basis)
        return state[eps]

    for eps in cfg.eps:
        setup(eps)

    def worker(point):
        eps, mu = point
        t0 = time.perf_counter()
        data, basis = state[eps]
        row = {"eps": eps, "mu": mu, "error": ""}
        try:
            vals = spectrum(assemble(mu, eps, cfg.K, data.coeffs)).eigenvalues
            arg = vals[np.argmax(vals.real)]
            lam_plus, lam_minus = unstable_roots(
                mu,
                eps,
                basis,
                data.coeffs,
                method=cfg.sideband_method,
                order=cfg.neumann_order,
                step_tol=cfg.newton_tol,
            )
            pred = predict_lambda(mu, eps, cfg.g)
            row.update(
                max_re=float(np.max(vals.real)),
                argmax=arg,
                red_plus=lam_plus,
                red_minus=lam_minus,
                pred_plus=pred.lambda_plus,
                rel_err_direct=abs(arg.real - pred.growth) / pred.growth,
                rel_err_reduced=abs(lam_plus - pred.lambda_plus) / abs(pred.lambda_plus),
                cross_gap=abs(arg - lam_plus),
            )
        except (NonConvergenceError, RootNotFoundError) as exc:
            row["error"] = str(exc)
        return row, time.perf_counter() - t0

    points = [(e, m) for e in cfg.eps for m in cfg.mu]
    out = _sweep(points, worker)

    columns = [
        "mu", "eps", "g", "K",
        "max_re", "argmax_re", "argmax_im",
        "red_plus_re", "red_plus_im", "red_minus_re", "red_minus_im",
        "pred_re", "pred_im", "rel_err_direct", "rel_err_reduced", "error",
    ]
    rows = []
    for row, _ in out:
        if row["error"]:
            rows.append(
                [fmt(row["mu"]), fmt(row["eps"]), fmt(cfg.g), str(cfg.K)]
                + ["nan"] * 11
                + [row["error"].replace(",", ";")]
            )
            continue
        rows.append(
            [
                fmt(row["mu"]), fmt(row["eps"]), fmt(cfg.g), str(cfg.K),
                fmt(row["max_re"]),
                fmt(row["argmax"].real), fmt(row["argmax"].imag),
                fmt(row["red_plus"].real), fmt(row["red_plus"].imag),
                fmt(row["red_minus"].real), fmt(row["red_minus"].imag),
                fmt(row["pred_plus"].real), fmt(row["pred_plus"].imag),
                fmt(row["rel_err_direct"]), fmt(row["rel_err_reduced"]),
                "",
            ]
        )
    timings = [
        f"timing eps={pt[0]} mu={pt[1]} wall_s={dt:.3f}"
        for pt, (_, dt) in zip(sorted(points), out)
    ]
    csv_path = os.path.join(cfg.out_dir, "bubble.csv")
    write_csv(csv_path, cfg, columns, rows, timings)

    branches, labels = [], []
    for eps in sorted(set(cfg.eps)):
        branch = [
            (row["argmax"].real, row["argmax"].imag)
            for row, _ in out
            if row["eps"] == eps and not row["error"]
        ]
        if branch:
            branches.append(sorted(branch, key=lambda p: p[1]))
            labels.append(fmt(eps))
    svg_path = os.path.join(cfg.out_dir, "locus.svg")
    # slope of the unstable branch is sqrt(2)/eps regardless of gravity
    slope = np.sqrt(2.0) / max(abs(e) for e in cfg.eps)
    _locus_svg(svg_path, branches, slope, labels)
    print(f"wrote {csv_path} and {svg_path} ({len(rows)} sweep points)")
    return 0


def cmd_reduce(cfg):
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)

    def cplx(z):
        return [float(np.real(z)), float(np.imag(z))]

    def mat(M):
        return [[cplx(M[j, k]) for k in range(4)] for j in range(4)]

    report = {"config": cfg.as_dict(), "points": []}
    for eps in cfg.eps:
        data = _pipeline_for(cfg, eps)
        basis = kernel_basis(data.wave, data.cmap, data.coeffs, traces=data.traces)
        for mu in cfg.mu:
            entry = {"eps": eps, "mu": mu}
            try:
                sys_ = reduced_matrices(
                    0.5j * mu * np.sqrt(cfg.g), mu, eps, basis, data.coeffs,
                    method=cfg.sideband_method, order=cfg.neumann_order,
                )
                lam_plus, lam_minus = unstable_roots(
                    mu, eps, basis, data.coeffs,
                    method=cfg.sideband_method, order=cfg.neumann_order,
                    step_tol=cfg.newton_tol,
                )
                fit = fit_characteristic_constants(mu, eps, basis, data.coeffs,
                                                   method=cfg.sideband_method)
                entry.update(
                    A=mat(sys_.A), I=mat(sys_.I), B=mat(sys_.B),
                    lambda_plus=cplx(lam_plus), lambda_minus=cplx(lam_minus),
                    char_fit={
                        "r1": cplx(fit.r1),
                        "r2": cplx(fit.r2),
                        "leading": cplx(fit.leading),
                    },
                )
            except (NonConvergenceError, RootNotFoundError) as exc:
                entry["error"] = str(exc)
            report["points"].append(entry)
    path = os.path.join(cfg.out_dir, "reduce.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
    print(f"wrote {path} ({len(report['points'])} points)")
    return 0


def cmd_validate(cfg):
    cfg.validate(need_mu=False)
    os.makedirs(cfg.out_dir, exist_ok=True)
    results = run_all()
    print(format_report(results))
    summary = {
        "config": cfg.as_dict(),
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
        "total_runtime_s": sum(r.runtime for r in results),
    }
    path = os.path.join(cfg.out_dir, "validate.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=1)
    print(f"wrote {path}")
    return 0 if summary["passed"] else 1


def _parse_float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stokes-spectra",
        description="Long-wave spectral instability of small steady water waves",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("stokes", cmd_stokes),
        ("spectrum", cmd_spectrum),
        ("bubble", cmd_bubble),
        ("reduce", cmd_reduce),
        ("validate", cmd_validate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--k", type=int, default=None, help="Fourier truncation")
        p.add_argument("--eps", type=_parse_float_list, default=None,
                       help="comma-separated amplitudes")
        p.add_argument("--mu", type=_parse_float_list, default=None,
                       help="comma-separated Bloch parameters")
        p.add_argument("--g", type=float, default=None, help="gravity")
        p.add_argument("--seed", type=int, default=None, help="RNG seed echoed in reports")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "out_dir": args.out,
        "K": args.k,
        "eps": args.eps,
        "mu": args.mu,
        "g": args.g,
        "seed": args.seed,
    }
    try:
        cfg = load_config(args.config, overrides)
        return args.func(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
