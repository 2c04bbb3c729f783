"""Command-line front end: point generation, sweeps, bound reports, RBF runs.

Every command writes CSV (or JSON with ``--format json``) to ``--out`` or
standard output.  With ``--out`` a run manifest is written next to the
output as ``<out>.manifest.json``; ``quasitri replay <manifest>`` re-runs
it.  Exit codes: 0 success, 2 invalid arguments or input, 3 computation
errors.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import io
import json
import math
import os
import re
import sys
from functools import partial
from importlib import metadata

import numpy as np

from . import bounded_voronoi as bv
from . import metrics, rbf
from .generators import (
    GENERATORS,
    generate,
    grid_level,
    greedy_steps,
    iid_uniform,
    RandomConfig,
)
from .geometry import GeometryError, Triangle, barycentric_grid, isoperimetric_quotient, parse_triangle, triangle_from_angles

WORKERS_ENV = "QUASITRI_WORKERS"
RANDOM_GENERATORS = ("iid", "poisson")
NON_NESTED = ("kronecker", "grid", "poisson")


class UsageError(Exception):
    """Bad arguments or unreadable input (exit code 2)."""


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__
        return __version__


def fmt(v) -> str:
    """17 significant digits for floats, plain ints, empty for missing."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def render(header: list[str], rows: list[list], form: str) -> str:
    if form == "json":
        recs = [dict(zip(header, r)) for r in rows]
        return json.dumps(recs, indent=1, default=_json_default) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def parse_angle(text: str) -> float:
    """Accept plain numbers and multiples of pi such as ``3pi/8`` or ``pi``."""
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?(?:pi|π)(?:/([0-9.eE+]+))?", s)
    try:
        if m:
            num = m.group(1)
            k = 1.0 if num in ("", "+") else -1.0 if num == "-" else float(num)
            den = float(m.group(2)) if m.group(2) else 1.0
            return k * math.pi / den
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    """``"45,105,210"`` or a range ``"45:210:15"`` (inclusive stop)."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        vals = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse integer list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty integer list")
    return vals


def triangle_arg(text: str) -> Triangle:
    try:
        return parse_triangle(text)
    except GeometryError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn, items: list) -> list:
    """Ordered map over a process pool; inline when one worker suffices."""
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with cf.ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def row_seed(seed: int, index: int) -> int:
    return int(seed) ^ int(index)


# -- generate ----------------------------------------------------------------

def cmd_generate(args) -> tuple[str, dict]:
    ps = generate(args.gen, args.triangle, args.n, seed=args.seed, alpha=args.alpha)
    rows = [[i, float(x), float(y)] for i, (x, y) in enumerate(ps.points)]
    info = {"points": len(ps), "non_nested": args.gen in NON_NESTED}
    for key in ("N", "alpha", "m", "inserted", "final_radius", "shrinks"):
        if key in ps.meta:
            info[key] = ps.meta[key]
    return render(["index", "x", "y"], rows, args.format), info


# -- mesh sweep --------------------------------------------------------------

def greedy_trace(t: Triangle, seeds: np.ndarray, n_stop: int) -> dict[int, tuple[float, float]]:
    """``n -> (q, h)`` for every prefix size from ``len(seeds)`` to ``n_stop``."""
    q = metrics.separation_radius(seeds) if len(seeds) > 1 else math.inf
    pts = [tuple(p) for p in seeds]
    out = {}
    for step in greedy_steps(t, seeds):
        out[step.n] = (q, step.covering)
        if step.n >= n_stop:
            break
        q = min(q, min(math.dist(step.point, p) for p in pts) / 2.0)
        pts.append(step.point)
    return out


def _stats(pts: np.ndarray, t: Triangle) -> tuple[float, float]:
    st = metrics.mesh_stats(pts, t)
    return st.separation, st.covering


def _mesh_trial(job, gen: str, t: Triangle, n_values: tuple[int, ...]) -> list[tuple[float, float]]:
    """One random trial: ``(q, h)`` for each requested ``n``."""
    _, seed = job
    out = []
    if gen == "iid":
        full = iid_uniform(t, max(n_values), RandomConfig(seed=seed)).points
        for n in n_values:
            out.append(_stats(full[:n], t))
    else:
        for n in n_values:
            out.append(_stats(generate(gen, t, n, seed=seed).points, t))
    return out


def _mesh_det(n: int, gen: str, t: Triangle) -> tuple[float, float]:
    return _stats(generate(gen, t, n).points, t)


def mesh_rows(gen: str, t: Triangle, n_values: list[int], trials: int, seed: int) -> list[list]:
    n_values = sorted(set(n_values))
    if gen == "vg":
        tr = metrics.vg_trace(t, max(n_values))
        table = {int(n): (q, h) for n, q, h in zip(tr.n, tr.q, tr.h)}
        stats = [table[n] for n in n_values]
    elif gen == "grid":
        stats = []
        by_level: dict[int, list[int]] = {}
        for n in n_values:
            by_level.setdefault(grid_level(n), []).append(n)
        cache = {}
        for m, ns in by_level.items():
            cache.update(greedy_trace(t, barycentric_grid(t, m), max(ns)))
        stats = [cache[n] for n in n_values]
    elif gen == "vdc":
        full = generate("vdc", t, max(n_values)).points
        stats = pmap(partial(_prefix_stats, full=full, t=t), n_values)
    elif gen == "kronecker":
        stats = pmap(partial(_mesh_det, gen=gen, t=t), n_values)
    else:
        jobs = [(k, row_seed(seed, k)) for k in range(trials)]
        per_trial = pmap(partial(_mesh_trial, gen=gen, t=t, n_values=tuple(n_values)), jobs)
        arr = np.array(per_trial)  # (trials, len(n_values), 2)
        rho = arr[:, :, 1] / arr[:, :, 0]
        return [[n, float(arr[:, i, 0].mean()), float(arr[:, i, 1].mean()), float(rho[:, i].mean())]
                for i, n in enumerate(n_values)]
    return [[n, q, h, h / q] for n, (q, h) in zip(n_values, stats)]


def _prefix_stats(n: int, full: np.ndarray, t: Triangle) -> tuple[float, float]:
    return _stats(full[:n], t)


def cmd_mesh_sweep(args) -> tuple[str, dict]:
    if args.n_max < 3:
        raise UsageError("--n-max must be >= 3")
    n_values = args.n_list or list(range(3, args.n_max + 1))
    if min(n_values) < 2:
        raise UsageError("mesh ratios need at least two points")
    if args.gen == "vg" and min(n_values) < 3:
        raise UsageError("VG starts from the three vertices")
    rows = mesh_rows(args.gen, args.triangle, n_values, args.trials, args.seed)
    info = {
        "non_nested": args.gen in NON_NESTED,
        "random": args.gen in RANDOM_GENERATORS,
        "trials": args.trials if args.gen in RANDOM_GENERATORS else 1,
        "trial_seeds": [row_seed(args.seed, k) for k in range(args.trials)] if args.gen in RANDOM_GENERATORS else [],
        "n_index": "lattice parameter N" if args.gen == "kronecker" else "number of points",
    }
    return render(["n", "q", "h", "rho"], rows, args.format), info


# -- shape sweep -------------------------------------------------------------

SHAPE_COLUMNS = ["alpha", "beta", "J", "vertex_rho", "corollary_bound", "k_primary", "k_edge",
                 "empirical_k", "rho_10", "rho_20", "rho_50"]
RHO_AT = (10, 20, 50)


def angle_grid(alpha_steps: int, beta_steps: int, min_j: float, margin: float = 0.01) -> list[tuple[float, float]]:
    """Angle pairs on ``[margin, pi - margin]^2`` that form triangles with ``J >= min_j``."""
    out = []
    for a in np.linspace(margin, math.pi - margin, alpha_steps):
        for b in np.linspace(margin, math.pi - margin, beta_steps):
            if a + b > math.pi - margin:
                continue
            if isoperimetric_quotient(triangle_from_angles(a, b)) >= min_j:
                out.append((float(a), float(b)))
    return out


def shape_row(ab: tuple[float, float], n_max: int) -> list:
    """One sweep row; VG runs until rho <= 2 and n >= 50, or until ``n_max``."""
    a, b = ab
    t = triangle_from_angles(a, b)
    bounds = metrics.triangle_bounds(t)
    verts = np.array(t.vertices)
    q = metrics.separation_radius(verts)
    pts = [tuple(v) for v in t.vertices]
    k, by_n = None, {}
    for step in greedy_steps(t, verts):
        rho = step.covering / q
        by_n[step.n] = rho
        if k is None and rho <= 2 * (1 + metrics.RHO_TOL):
            k = step.n
        if step.n >= n_max or (k is not None and step.n >= max(RHO_AT)):
            break
        q = min(q, min(math.dist(step.point, p) for p in pts) / 2.0)
        pts.append(step.point)
    return [a, b, bounds.iso_quotient, bounds.vertex_rho, bounds.corollary_bound,
            bounds.k_bound_primary, bounds.k_bound_edge_form, k] + [by_n.get(n) for n in RHO_AT]


def cmd_shape_sweep(args) -> tuple[str, dict]:
    if args.alpha_steps < 2 or args.beta_steps < 2:
        raise UsageError("angle steps must be >= 2")
    if not args.min_j >= 1e-4:
        raise UsageError("--min-j must be >= 1e-4")
    pairs = angle_grid(args.alpha_steps, args.beta_steps, args.min_j)
    rows = pmap(partial(shape_row, n_max=args.n), pairs)
    info = {"triangles": len(rows), "angle_margin": 0.01, "empirical_k_cap": args.n}
    return render(SHAPE_COLUMNS, rows, args.format), info


# -- rbf ---------------------------------------------------------------------

RBF_COLUMNS = ["generator", "n", "kernel", "c", "test_function", "ell", "shift", "e2",
               "residual", "points", "seeds", "status"]


def rbf_cell(pts: np.ndarray, t: Triangle, func: str, kernel: str, c: float, res: int) -> dict:
    ell = rbf.lengthscale(c, t.area, len(pts))
    k = rbf.KernelSpec(kernel, ell)
    try:
        s = rbf.fit(pts, rbf.test_function_eval(func, pts), k)
    except rbf.SingularSystem:
        return {"ell": ell, "shift": None, "e2": None, "residual": None, "status": "singular"}
    return {"ell": ell, "shift": s.regularization_shift, "e2": rbf.e2_error(s, func, t, res),
            "residual": s.residual, "status": "ok"}


def _rbf_row(job, t: Triangle, func: str, kernel: str, c: float, res: int, seeds: int, seed: int,
             nested: dict) -> list:
    gen, n = job
    if gen in RANDOM_GENERATORS:
        cells = []
        for k in range(seeds):
            pts = generate(gen, t, n, seed=row_seed(seed, k)).points
            cells.append((rbf_cell(pts, t, func, kernel, c, res), len(pts)))
        ok = [cell for cell, _ in cells if cell["status"] == "ok"]
        status = "ok" if len(ok) == len(cells) else f"singular:{len(cells) - len(ok)}"
        e2 = float(np.mean([cell["e2"] for cell in ok])) if ok else None
        shift = max(cell["shift"] for cell in ok) if ok else None
        resid = max(cell["residual"] for cell in ok) if ok else None
        return [gen, n, kernel, c, func, cells[0][0]["ell"], shift, e2, resid, cells[0][1], seeds, status]
    pts = nested[gen][:n] if gen in nested else generate(gen, t, n).points
    cell = rbf_cell(pts, t, func, kernel, c, res)
    return [gen, n, kernel, c, func, cell["ell"], cell["shift"], cell["e2"], cell["residual"],
            len(pts), 1, cell["status"]]


def rbf_rows(t: Triangle, func: str, kernel: str, c: float, gens: list[str], n_list: list[int],
             seeds: int = 20, seed: int = 0, res: int = rbf.VALIDATION_RESOLUTION) -> list[list]:
    nmax = max(n_list)
    nested = {}
    if "vg" in gens:
        nested["vg"] = generate("vg", t, max(nmax, 3)).points
    if "vdc" in gens:
        nested["vdc"] = generate("vdc", t, nmax).points
    jobs = [(g, n) for g in gens for n in n_list]
    fn = partial(_rbf_row, t=t, func=func, kernel=kernel, c=c, res=res, seeds=seeds, seed=seed, nested=nested)
    return pmap(fn, jobs)


def cmd_rbf(args) -> tuple[str, dict]:
    c = args.c if args.c is not None else rbf.EXPERIMENT_C.get((args.test_function, args.kernel))
    if c is None:
        raise UsageError(f"no default c for {args.test_function}/{args.kernel}; pass --c")
    if c <= 0:
        raise UsageError("--c must be positive")
    if "vg" in args.generators and min(args.n_list) < 3:
        raise UsageError("VG needs n >= 3")
    rows = rbf_rows(args.triangle, args.test_function, args.kernel, c, args.generators, args.n_list,
                    seeds=args.seeds, seed=args.seed, res=args.resolution)
    info = {
        "grid_resolution": args.resolution,
        "validation_points": (args.resolution + 1) * (args.resolution + 2) // 2,
        "random_seeds": [row_seed(args.seed, k) for k in range(args.seeds)],
        "c": c,
    }
    return render(RBF_COLUMNS, rows, args.format), info


# -- voronoi dump / bounds ---------------------------------------------------

def read_points(path: str) -> np.ndarray:
    """Points from CSV with columns ``index,x,y`` or ``x,y`` (header optional)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise UsageError(f"{path}: no points")
    header = [c.strip().lower() for c in rows[0]]
    if "x" in header and "y" in header:
        ix, iy = header.index("x"), header.index("y")
        rows = rows[1:]
    else:
        width = len(rows[0])
        if width not in (2, 3):
            raise UsageError(f"{path}:1: expected 2 or 3 columns, got {width}")
        ix, iy = width - 2, width - 1
    pts = []
    for ln, r in enumerate(rows, start=2 if "x" in header else 1):
        try:
            x, y = float(r[ix]), float(r[iy])
        except (IndexError, ValueError):
            raise UsageError(f"{path}:{ln}: cannot parse point from {','.join(r)!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise UsageError(f"{path}:{ln}: non-finite coordinate")
        pts.append((x, y))
    if not pts:
        raise UsageError(f"{path}: no points")
    return np.array(pts)


def cmd_voronoi_dump(args) -> tuple[str, dict]:
    pts = read_points(args.points)
    try:
        d = bv.build(pts, args.triangle)
    except (bv.DuplicateSites, bv.SiteOutsideDomain) as exc:
        raise UsageError(str(exc)) from None
    return json.dumps(d.to_json(), indent=1) + "\n", {"sites": len(pts)}


def cmd_bounds(args) -> tuple[str, dict]:
    b = metrics.triangle_bounds(args.triangle)
    return json.dumps(b.to_json(args.triangle), indent=1) + "\n", {}


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasitri", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, triangle=True):
        if triangle:
            sp.add_argument("--triangle", type=triangle_arg, default="equilateral",
                            help="preset (equilateral, reference, skinny) or x1,y1,x2,y2,x3,y3")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("generate", help="write a point set")
    common(g)
    g.add_argument("--gen", choices=GENERATORS, required=True)
    g.add_argument("--n", type=int, required=True, help="number of points (Kronecker: lattice parameter N)")
    g.add_argument("--alpha", type=parse_angle, default=3 * math.pi / 8, help="Kronecker rotation, e.g. 3pi/8")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mesh-sweep", help="q, h, rho for every prefix size")
    common(m)
    m.add_argument("--gen", choices=GENERATORS, required=True)
    m.add_argument("--n-max", type=int, default=210)
    m.add_argument("--n-list", type=parse_int_list, default=None, help="explicit n values, e.g. 20,100,200")
    m.add_argument("--trials", type=int, default=100, help="trials for random generators")
    m.set_defaults(func=cmd_mesh_sweep)

    s = sub.add_parser("shape-sweep", help="bounds and VG behaviour over an angle grid")
    common(s, triangle=False)
    s.add_argument("--alpha-steps", type=int, default=15)
    s.add_argument("--beta-steps", type=int, default=15)
    s.add_argument("--n", type=int, default=400, help="VG run cap (empirical_k blank if not reached)")
    s.add_argument("--min-j", type=float, default=0.02, help="minimum isoperimetric quotient (>= 1e-4)")
    s.set_defaults(func=cmd_shape_sweep)

    r = sub.add_parser("rbf", help="RBF interpolation error sweep")
    common(r)
    r.add_argument("--test-function", choices=rbf.TEST_FUNCTIONS, default="franke")
    r.add_argument("--kernel", choices=rbf.KERNELS, default="gaussian")
    r.add_argument("--c", type=float, default=None, help="lengthscale coefficient (default per experiment)")
    r.add_argument("--generators", type=lambda s: _gen_list(s), default=list(GENERATORS))
    r.add_argument("--n-list", type=parse_int_list, default=parse_int_list("45,105,210"))
    r.add_argument("--seeds", type=int, default=20, help="seeds averaged for random generators")
    r.add_argument("--resolution", type=int, default=rbf.VALIDATION_RESOLUTION)
    r.set_defaults(func=cmd_rbf)

    v = sub.add_parser("voronoi-dump", help="bounded Voronoi diagram as JSON")
    common(v)
    v.add_argument("--points", required=True, help="CSV of points (index,x,y or x,y)")
    v.set_defaults(func=cmd_voronoi_dump)

    b = sub.add_parser("bounds", help="closed-form bounds for one triangle as JSON")
    common(b)
    b.set_defaults(func=cmd_bounds)

    rp = sub.add_parser("replay", help="re-run a command from its manifest")
    rp.add_argument("manifest")
    rp.set_defaults(func=None)
    return p


def _gen_list(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in GENERATORS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown generators {bad}; choose from {', '.join(GENERATORS)}")
    return names


def _manifest(argv: list[str], args, info: dict) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format", "command")}
    params = {k: (v.to_json() if isinstance(v, Triangle) else v) for k, v in params.items()}
    return {
        "command": args.command,
        "argv": argv,
        "parameters": params,
        "seed": args.seed,
        "tool_version": tool_version(),
        "output_paths": [args.out],
        "workers_env": WORKERS_ENV,
        "info": info,
    }


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad arguments
    if args.command == "replay":
        try:
            with open(args.manifest) as fh:
                old = json.load(fh)["argv"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
            return 2
        return run(old)
    if hasattr(args, "n") and isinstance(args.n, int) and args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return 2
    if getattr(args, "trials", 1) < 1 or getattr(args, "seeds", 1) < 1:
        print("error: --trials/--seeds must be >= 1", file=sys.stderr)
        return 2
    try:
        text, info = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump(_manifest(argv, args, info), fh, indent=1, default=_json_default)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    return run(list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    raise SystemExit(main())
