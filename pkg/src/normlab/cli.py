"""Command-line front end: ``normlab <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 a library error (bad gauge, not a
norm, failed construction) reported as diagnostic JSON on stdout.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from ._numerics import make_rng
from . import convexity, duality, ellipsoid, homog, isometry, mazur
from .errors import NormlabError
from .gauge import PolarGauge, gauge_dumps, gauge_parse, unit

__all__ = ["main", "render_svg", "run_battery", "BATTERY_GAUGES"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- output helpers ---------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_report(command: str, digest: str | None, seed: int, results, wall_ms: int = 0) -> dict:
    return {"command": command, "gaugeDigest": digest, "seed": seed, "results": results, "wallTimeMs": wall_ms}


def _load_gauge(path: str) -> tuple[PolarGauge, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read gauge file {path!r}: {exc.strerror}") from exc
    return gauge_parse(raw), hashlib.sha256(raw).hexdigest()


def _try(fn, *args, **kw):
    """Run a construction, turning library failures into an ``error`` record."""
    try:
        out = fn(*args, **kw)
    except NormlabError as exc:
        return {"error": type(exc).__name__, "message": str(exc)}
    return out.to_dict() if hasattr(out, "to_dict") else out


# -- SVG --------------------------------------------------------------------


SVG_SIZE = 800
SVG_STYLE = (
    ".ball{fill:none;stroke:#1f3b73;stroke-width:0.008}"
    ".dual{fill:none;stroke:#7a7a7a;stroke-width:0.006;stroke-dasharray:0.03 0.02}"
    ".ellipse{fill:none;stroke:#b5482b;stroke-width:0.006}"
    ".contact{fill:#b5482b}"
)


def _polyline(points: np.ndarray, cls: str) -> str:
    pts = " ".join(f"{x:.6f},{y:.6f}" for x, y in points)
    return f'<polyline class="{cls}" points="{pts}"/>'


def render_svg(gauge: PolarGauge, theta: float | None = None, samples: int = 1024) -> str:
    """Unit ball, dual ball (dashed), John ellipse with contacts, and tangent ellipses at ``theta``."""
    convexity.require_norm(gauge)
    t = 2 * np.pi * np.arange(samples + 1) / samples
    parts = [_polyline(gauge.boundary(t), "ball")]
    dual_r = duality.exact_dual_profile(gauge, t)
    parts.append(_polyline(dual_r[:, None] * unit(t), "dual"))
    J = ellipsoid.john_ellipse(gauge)
    parts.append(_polyline(J.boundary(t), "ellipse"))
    cs = ellipsoid.contact_set(gauge, J)
    if not cs.full:
        for a in cs.angles:
            for p in (J.boundary(a), -J.boundary(a)):
                parts.append(f'<circle class="contact" cx="{p[0]:.6f}" cy="{p[1]:.6f}" r="0.015"/>')
    if theta is not None and gauge.smooth:
        x = gauge.boundary(theta)
        for fn in (ellipsoid.inner_ellipsoid_at, ellipsoid.outer_ellipsoid_at):
            try:
                parts.append(_polyline(fn(gauge, x).boundary(t), "ellipse"))
            except NormlabError:
                pass
    body = "\n".join(parts)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        'viewBox="-1.6 -1.6 3.2 3.2">\n'
        f"<style>{SVG_STYLE}</style>\n"
        '<g transform="scale(1,-1)">\n'
        f"{body}\n</g>\n</svg>\n"
    )


# -- subcommands ------------------------------------------------------------


def _vec(vals) -> np.ndarray:
    return np.array([float(v) for v in vals])


def cmd_validate(a, g):
    rep = convexity.validate(g, a.grid)
    if a.format == "csv":
        return convexity.margin_table(g, a.grid), (0 if rep.isNorm else 2)
    return rep.to_dict(), (0 if rep.isNorm else 2)


def cmd_norm(a, g):
    v = _vec(a.v)
    return {"v": v, "norm": float(g.norm(v))}, 0


def cmd_dual(a, g):
    out = {}
    if a.f is not None:
        f = _vec(a.f)
        out["f"], out["dualNorm"] = f, duality.dual_norm(g, f)
    fit = duality.dual_gauge(g, a.m)
    out["dualGauge"] = {"fit": fit.fit.to_dict(), "residual": fit.residual, "harmonics": fit.harmonics}
    return out, 0


def cmd_defect(a, g):
    if a.format == "csv":
        t, vals = duality.ratio_field(g)
        rows = [(t[i], t[j], vals[i, j]) for i in range(len(t)) for j in range(len(t))]
        return _csv(["theta_x", "theta_y", "ratio"], rows), 0
    return duality.contraction_defect(g, a.samples, a.seed).to_dict(), 0


def cmd_john(a, g):
    E = ellipsoid.john_ellipse(g, a.m)
    return {"john": E.to_dict(), "area": E.area, "contacts": ellipsoid.contact_set(g, E, a.tol).to_dict()}, 0


def cmd_sigma(a, g):
    return ellipsoid.sigma_bisector_closure(g, a.tol).to_dict(), 0


def cmd_ellipsoids(a, g):
    x = g.boundary(a.theta)
    return {"theta": a.theta, "x": x,
            "inner": _try(ellipsoid.inner_ellipsoid_at, g, x),
            "outer": _try(ellipsoid.outer_ellipsoid_at, g, x)}, 0


def cmd_cert(a, g):
    return ellipsoid.st_certificate(g, g.boundary(a.theta_x), g.boundary(a.theta_y)).to_dict(), 0


def _mazur_rows(pairs, ns, samples, seed):
    rows = []
    for p, q in pairs:
        for n in ns:
            est = mazur.mazur_lipschitz(p, q, n, samples, seed)
            x, y = est.witnessPair
            rows.append((p, q, n, est.value, q / p,
                         ";".join(repr(float(v)) for v in x), ";".join(repr(float(v)) for v in y)))
    return rows


MAZUR_HEADER = ["p", "q", "n", "estimate", "bound", "witness_x", "witness_y"]
ISO_HEADER = ["n", "p", "groupOrder", "minGap", "bound", "argminCycleType"]


def cmd_mazur(a, g):
    rows = _mazur_rows([(a.p, a.q)], [a.n], a.samples, a.seed)
    if a.format == "json":
        return [dict(zip(MAZUR_HEADER, r)) for r in rows], 0
    return _csv(MAZUR_HEADER, rows), 0


def _iso_row(n, p):
    m = isometry.min_gap(n, p)
    return (n, p, m.groupOrder, m.value, "" if m.bound is None else m.bound, m.argmin.cycle_type())


def cmd_iso_gap(a, g):
    row = _iso_row(a.n, a.p)
    if a.format == "json":
        return dict(zip(ISO_HEADER, row)), 0
    return _csv(ISO_HEADER, [row]), 0


def cmd_homog(a, g):
    return homog.homog_extend_check(g, a.alpha, a.r, a.R, a.samples, a.seed).to_dict(), 0


def cmd_taylor(a, g):
    x, h = g.boundary(a.theta_x), g.boundary(a.theta_h)
    return homog.taylor_diagnostic(g, x, h, a.max_order).to_dict(), 0


def cmd_render(a, g):
    return render_svg(g, a.theta), 0


# -- the battery ------------------------------------------------------------


BATTERY_GAUGES = {
    "circle": {"kind": "trigpoly", "a0": 1.0, "cos": [], "sin": []},
    "perturbed": {"kind": "trigpoly", "a0": 1.025, "cos": [0.0, -0.025], "sin": []},
    "ellipse": {"kind": "ellipse", "b": 0.8, "e": 0.6, "theta0": 0.3},
    "lp4": {"kind": "lp", "p": 4},
    "lp64": {"kind": "lp", "p": 64},
    "lp1_5": {"kind": "lp", "p": 1.5},
}
BATTERY_MAZUR = [(2, 3), (2, 4), (1.5, 3), (3, 4)]
BATTERY_ISO = [(n, p) for n in (2, 3) for p in (1.5, 3, 4, 2)]


def _gauge_battery(g: PolarGauge, seed: int, samples: int) -> dict:
    out = {"gauge": g.to_dict(), "validate": convexity.validate(g).to_dict()}
    out["dual"] = _try(lambda: {"residual": duality.dual_gauge(g, 32).residual})
    out["john"] = _try(ellipsoid.john_ellipse, g)
    out["sigma"] = _try(ellipsoid.sigma_bisector_closure, g)
    if g.smooth:
        out["defect"] = _try(duality.contraction_defect, g, samples, seed)
        out["ellipsoids"] = {
            name: {"inner": _try(ellipsoid.inner_ellipsoid_at, g, g.boundary(t)),
                   "outer": _try(ellipsoid.outer_ellipsoid_at, g, g.boundary(t))}
            for name, t in (("theta_0", 0.0), ("theta_pi_4", np.pi / 4))
        }
        tx, ty = make_rng(seed).random(2) * 2 * np.pi
        out["cert"] = _try(ellipsoid.st_certificate, g, g.boundary(tx), g.boundary(ty))
        out["homog"] = _try(homog.homog_extend_check, g, 2.0, 1.0, 2.0, min(samples, 4000), seed)
    if g.kind in ("trigpoly", "ellipse"):
        out["taylor"] = _try(homog.taylor_diagnostic, g, g.boundary(0.0), g.boundary(np.pi / 2))
    return out


def run_battery(out_dir: Path, seed: int = 0, samples: int = 4000, extra: dict | None = None) -> list[Path]:
    """Write the full battery (JSON, CSV, SVG) into ``out_dir``; returns the files written."""
    out_dir = Path(out_dir)
    docs = dict(BATTERY_GAUGES)
    if extra:
        docs.update(extra)
    results, written = {}, []
    for name, doc in docs.items():
        g = gauge_parse(doc)
        results[name] = _gauge_battery(g, seed, samples)
        path = out_dir / f"{name}.svg"
        write_atomic(path, render_svg(g, 0.0 if g.smooth else None))
        written.append(path)
        path = out_dir / f"{name}_margins.csv"
        write_atomic(path, convexity.margin_table(g))
        written.append(path)
    path = out_dir / "mazur.csv"
    write_atomic(path, _csv(MAZUR_HEADER, _mazur_rows(BATTERY_MAZUR, (2, 3), samples, seed)))
    written.append(path)
    path = out_dir / "iso_gap.csv"
    write_atomic(path, _csv(ISO_HEADER, [_iso_row(n, p) for n, p in BATTERY_ISO]))
    written.append(path)
    digest = hashlib.sha256("".join(gauge_dumps(gauge_parse(d)) for d in docs.values()).encode()).hexdigest()
    path = out_dir / "report.json"
    write_atomic(path, dumps(run_report("report", digest, seed, results)))
    written.append(path)
    return written


def cmd_report(a, g):
    if not a.out:
        raise UsageError("report needs --out DIR")
    extra = {"user": json.loads(Path(a.gauge).read_text())} if a.gauge else None
    files = run_battery(Path(a.out), a.seed, a.samples, extra)
    return {"files": [f.name for f in files]}, 0


# -- parser -----------------------------------------------------------------


COMMANDS = {
    "validate": (cmd_validate, True, ("json", "csv")),
    "norm": (cmd_norm, True, ("json",)),
    "dual": (cmd_dual, True, ("json",)),
    "defect": (cmd_defect, True, ("json", "csv")),
    "john": (cmd_john, True, ("json",)),
    "sigma": (cmd_sigma, True, ("json",)),
    "ellipsoids": (cmd_ellipsoids, True, ("json",)),
    "cert": (cmd_cert, True, ("json",)),
    "mazur": (cmd_mazur, False, ("csv", "json")),
    "iso-gap": (cmd_iso_gap, False, ("csv", "json")),
    "homog": (cmd_homog, True, ("json",)),
    "taylor": (cmd_taylor, True, ("json",)),
    "render": (cmd_render, True, ("svg",)),
    "report": (cmd_report, False, ("json",)),
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="normlab", description="Numerical geometry of planar norms.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)
    for name, (_, needs_gauge, formats) in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--gauge", required=needs_gauge, help="gauge JSON file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (directory for report)")
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--timing", action="store_true", help="record wall time in the report")
        if name == "validate":
            sp.add_argument("--grid", type=int, default=1024)
        elif name == "norm":
            sp.add_argument("--v", nargs=2, type=float, required=True, metavar=("X", "Y"))
        elif name == "dual":
            sp.add_argument("--f", nargs=2, type=float, metavar=("F1", "F2"))
            sp.add_argument("--m", type=int, default=32)
        elif name in ("defect", "report"):
            sp.add_argument("--samples", type=int, default=10_000 if name == "defect" else 4000)
        elif name == "john":
            sp.add_argument("--m", type=int, default=256)
            sp.add_argument("--tol", type=float, default=1e-6)
        elif name == "sigma":
            sp.add_argument("--tol", type=float, default=1e-6)
        elif name in ("ellipsoids", "render"):
            sp.add_argument("--theta", type=float, default=None if name == "render" else 0.0)
        elif name == "cert":
            sp.add_argument("--theta-x", type=float, required=True)
            sp.add_argument("--theta-y", type=float, required=True)
        elif name == "mazur":
            sp.add_argument("--p", type=float, required=True)
            sp.add_argument("--q", type=float, required=True)
            sp.add_argument("--n", type=int, default=2)
            sp.add_argument("--samples", type=int, default=10_000)
        elif name == "iso-gap":
            sp.add_argument("--n", type=int, required=True)
            sp.add_argument("--p", type=float, required=True)
        elif name == "homog":
            sp.add_argument("--alpha", type=float, required=True)
            sp.add_argument("--r", type=float, required=True)
            sp.add_argument("--R", type=float, required=True)
            sp.add_argument("--samples", type=int, default=10_000)
        elif name == "taylor":
            sp.add_argument("--theta-x", type=float, default=0.0)
            sp.add_argument("--theta-h", type=float, default=math.pi / 2)
            sp.add_argument("--max-order", type=int, default=6)
    return ap


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        fn, needs_gauge, _ = COMMANDS[args.command]
        g, digest = None, None
        if needs_gauge or (args.gauge and args.command != "report"):
            g, digest = _load_gauge(args.gauge)
        t0 = time.perf_counter()
        result, code = fn(args, g)
        wall = int(round((time.perf_counter() - t0) * 1000)) if args.timing else 0
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except NormlabError as exc:
        cmd = getattr(locals().get("args"), "command", None)
        stdout.write(dumps({"error": type(exc).__name__, "message": str(exc), "command": cmd}))
        return 2
    if isinstance(result, str):
        text = result
    else:
        text = dumps(run_report(args.command, digest, args.seed, result, wall))
    if args.out and args.command != "report":
        write_atomic(Path(args.out), text)
    else:
        stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
