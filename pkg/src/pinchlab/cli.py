"""Command-line interface.

Every subcommand accepts ``--config FILE`` holding flat ``key = value`` lines;
values given on the command line take precedence.  Exit status is 0 on
success, 1 when a computation fails and 2 for usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import PinchlabError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command line; exit status 2."""


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits for reals; other values via str."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_json(obj, indent: int = 2) -> str:
    """JSON with every real written to 17 significant digits (non-finite values become null)."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            o = list(o)
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if o is None:
            return "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return fmt(float(o)) if math.isfinite(o) else "null"
        if isinstance(o, (complex, np.complexfloating)):
            return enc([float(o.real), float(o.imag)], level)
        return json.dumps(str(o), ensure_ascii=False)

    return enc(obj, 0) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            from .errors import IoError
            raise IoError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------

def parse_complex(s: str) -> complex:
    """'re,im' or any Python complex literal ('0.25', '1-2j')."""
    s = str(s).strip()
    if "," in s:
        re_, im = s.split(",", 1)
        return complex(float(re_), float(im))
    try:
        return complex(s.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from None


def parse_coeffs(s: str) -> list[complex]:
    """Ascending coefficients separated by ';' (each 're,im' or a complex literal) or by spaces."""
    parts = [p for p in (s.split(";") if ";" in s else s.split()) if p.strip()]
    if len(parts) == 1 and "," in parts[0] and ";" not in s:
        # a plain comma list of reals
        parts = parts[0].split(",")
    return [parse_complex(p) for p in parts]


def parse_floats(s: str) -> list[float]:
    return [float(x) for x in str(s).replace(";", ",").split(",") if x.strip()]


def parse_viewport(s: str) -> tuple:
    v = parse_floats(s)
    if len(v) != 4:
        raise argparse.ArgumentTypeError("viewport needs xmin,xmax,ymin,ymax")
    return tuple(v)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_map_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("map (give one)")
    g.add_argument("--c", type=parse_complex, help="quadratic z^2 + c ('re,im')")
    g.add_argument("--num", help="numerator coefficients, ascending ('1;0;1' or '1,0,1')")
    g.add_argument("--den", help="denominator coefficients, ascending (default 1)")
    g.add_argument("--map-file", help="JSON map file {num: [[re,im],...], den: [...]}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchlab", description="Numerics for pinching and plumbing of rational maps.")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("render", help="Julia set picture (PPM, or PNG with Pillow)")
    _add_map_options(p)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--viewport", type=parse_viewport, default=(-2.0, 2.0, -2.0, 2.0))
    p.add_argument("--max-iter", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output image path (.ppm or .png)")

    p = sub.add_parser("periodic", help="periodic points of a given period, as CSV")
    _add_map_options(p)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--orbits", action="store_true", help="also report the critical orbits")
    p.add_argument("--out")

    p = sub.add_parser("modulus", help="moduli of annuli and the quadrilateral inequalities, as JSON")
    p.add_argument("--kind", choices=["round", "two_disks", "sampled", "extract", "sectors", "three_quads"])
    p.add_argument("--r-in", type=float)
    p.add_argument("--r-out", type=float)
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--polylines", help="CSV file: x,y rows, blank line between inner and outer loop")
    p.add_argument("--z0", type=parse_complex)
    p.add_argument("--sectors", type=int, default=4, help="number of equal sectors (kind=sectors)")
    p.add_argument("--rect", type=parse_floats, help="Q as x0,x1,y0,y1 (kind=three_quads)")
    p.add_argument("--q1", type=parse_floats, help="x0,x1 of Q1")
    p.add_argument("--q3", type=parse_floats, help="x0,x1 of Q3")
    p.add_argument("--beta", type=parse_floats, help="beta1,beta3")
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--no-check", action="store_true", help="skip the modulus precondition (kind=extract)")
    p.add_argument("--out")

    p = sub.add_parser("pinchmodel", help="pinching-model modulus table (CSV) and |mu| picture")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--t", type=parse_floats, default=[0.0, 1.0, 2.0, 5.0])
    p.add_argument("--t0", type=parse_floats, default=[0.0, 0.5, 1.0])
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--mu-image", help="write |mu| at the largest t as an image")
    p.add_argument("--image-size", type=int, default=256)
    p.add_argument("--out")

    p = sub.add_parser("pinch", help="pinching path in the quadratic family")
    psub = p.add_subparsers(dest="action", metavar="ACTION")
    r = psub.add_parser("run", help="run the path and write the per-t report")
    r.add_argument("--lambda0", type=parse_complex, default=0.25)
    r.add_argument("--tmax", type=float, default=50.0)
    r.add_argument("--steps", type=int, default=50)
    r.add_argument("--grid", type=int, default=10_000)
    r.add_argument("--julia", type=int, default=10_000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--reverse", action="store_true", help="write the rows in decreasing t (plumbing reading)")
    r.add_argument("--frames", help="directory for per-t Julia pictures")
    r.add_argument("--out")

    p = sub.add_parser("obstruct", help="transition matrix, spectral radius and verdict, as JSON")
    p.add_argument("--input", help="JSON {curves: [...], lifts: [...]}")
    p.add_argument("--context", choices=["general", "geometrically_finite_with_accumulation"])
    p.add_argument("--out")

    p = sub.add_parser("distort", help="distortion functionals of z + eps z^2, as JSON")
    p.add_argument("--eps", type=parse_floats, default=[0.01, 0.05, 0.1])
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--configs", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--pre", type=parse_coeffs, help="Möbius a,b,c,d composed before the map")
    p.add_argument("--post", type=parse_coeffs, help="Möbius a,b,c,d composed after the map")
    p.add_argument("--out")

    p = sub.add_parser("petal", help="attracting petal and Fatou coordinate at a parabolic fixed point")
    _add_map_options(p)
    p.add_argument("--iterate", type=int, default=1, help="use the q-th iterate (rotation p/q)")
    p.add_argument("--scale", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--out", help="CSV of (z, Φ(z)) on the petal sample")
    return parser


def _version() -> str:
    from . import __version__
    return __version__


REQUIRED = {
    "render": ["map", "out"],
    "periodic": ["map"],
    "modulus": ["kind"],
    "pinchmodel": [],
    "pinch": ["action"],
    "obstruct": ["input"],
    "distort": [],
    "petal": ["map"],
}


def read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _subparser(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> argparse.ArgumentParser:
    sp = parser._subparsers._group_actions[0].choices[ns.command]
    if ns.command == "pinch" and getattr(ns, "action", None):
        sp = sp._subparsers._group_actions[0].choices[ns.action]
    return sp


_NEGATIVE = re.compile(r"^-(\d|\.\d|inf|nan)", re.IGNORECASE)


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """'--c -1,0' -> '--c=-1,0' so argparse does not read the value as an option."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _NEGATIVE.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    """Validated namespace; raises UsageError for bad input."""
    argv = _glue_negative_values(list(argv))
    cfg_path = None
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            raise UsageError("--config needs a file")
        cfg_path = argv[i + 1]
        del argv[i:i + 2]
    parser = build_parser()
    ns = _parse(parser, argv)
    if not ns.command:
        raise UsageError(parser.format_usage().strip() + "\nerror: a subcommand is required")
    if ns.command == "pinch" and not getattr(ns, "action", None):
        raise UsageError("pinch needs an action: run")
    if cfg_path:
        cfg = read_config(cfg_path)
        sp = _subparser(parser, ns)
        dests = {a.dest: a for a in sp._actions if a.dest not in ("help",)}
        explicit = _explicit_dests(sp, argv)
        for k, v in cfg.items():
            if k not in dests:
                raise UsageError(f"unknown config key {k!r} for {ns.command}")
            if k in explicit:
                continue
            act = dests[k]
            try:
                if act.const is True and act.nargs == 0:
                    val = v.lower() in ("1", "true", "yes", "on")
                else:
                    val = act.type(v) if act.type else v
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {k}: {exc}") from exc
            if act.choices and val not in act.choices:
                raise UsageError(f"config key {k}: {val!r} not in {list(act.choices)}")
            setattr(ns, k, val)
    _validate(ns)
    return ns


def _explicit_dests(sp: argparse.ArgumentParser, argv: Sequence[str]) -> set:
    seen = set()
    for a in sp._actions:
        if any(opt in argv or any(x.startswith(opt + "=") for x in argv) for opt in a.option_strings):
            seen.add(a.dest)
    return seen


def _parse(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    err = io.StringIO()
    old = sys.stderr
    sys.stderr = err
    try:
        return parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            sys.stderr = old
            raise
        raise UsageError(err.getvalue().strip() or "invalid arguments") from None
    finally:
        sys.stderr = old


def _has_map(ns) -> bool:
    return any(getattr(ns, k, None) is not None for k in ("c", "num", "map_file"))


def _validate(ns: argparse.Namespace) -> None:
    for key in REQUIRED.get(ns.command, []):
        if key == "map":
            if not _has_map(ns):
                raise UsageError(f"{ns.command}: give a map with --c, --num/--den or --map-file")
            if sum(getattr(ns, k, None) is not None for k in ("c", "num", "map_file")) > 1:
                raise UsageError(f"{ns.command}: give only one of --c, --num, --map-file")
        elif getattr(ns, key, None) is None:
            raise UsageError(f"{ns.command}: --{key.replace('_', '-')} is required")
    if ns.command == "modulus":
        need = {"round": ["r_in", "r_out"], "two_disks": ["r1", "r2"], "sampled": ["polylines"],
                "extract": ["polylines", "z0"], "sectors": ["r_in", "r_out"],
                "three_quads": ["rect", "q1", "q3", "beta"]}[ns.kind]
        for k in need:
            if getattr(ns, k) is None:
                raise UsageError(f"modulus --kind {ns.kind} needs --{k.replace('_', '-')}")
    if ns.command == "distort" and (ns.pre is None) != (ns.post is None):
        raise UsageError("distort: --pre and --post go together")


def _map(ns):
    from .sphere import RationalMap
    if ns.c is not None:
        return RationalMap.quadratic(ns.c)
    if ns.map_file is not None:
        try:
            return RationalMap.from_json(Path(ns.map_file).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {ns.map_file}: {exc}") from exc
    num = parse_coeffs(ns.num)
    den = parse_coeffs(ns.den) if ns.den else [1.0]
    return RationalMap(tuple(num), tuple(den))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_render(ns) -> int:
    from .render import render_julia
    render_julia(_map(ns), ns.width, ns.height, ns.viewport, ns.out, ns.max_iter, ns.seed)
    print(f"wrote {ns.out}")
    return EXIT_OK


def cmd_periodic(ns) -> int:
    from .dynamics import geometric_finiteness_summary, periodic_points, periodic_points_csv, postcritical_orbit
    f = _map(ns)
    text = periodic_points_csv(periodic_points(f, ns.period))
    if ns.orbits:
        reports = postcritical_orbit(f)
        text += "\n# critical orbits\ncritical_re,critical_im,status,fit_exponent\n"
        for r in reports:
            z = r.critical_point.to_complex()
            re_, im = ("inf", "0") if not np.isfinite(z) else (fmt(z.real), fmt(z.imag))
            text += f"{re_},{im},{r.status},{fmt(r.fit_exponent) if r.fit_exponent is not None else ''}\n"
        text += f"# {geometric_finiteness_summary(reports)}\n"
    _emit(text, ns.out)
    return EXIT_OK


def cmd_modulus(ns) -> int:
    from . import moduli as M
    k = ns.kind
    if k == "round":
        reg = M.AnnulusRegion.round(ns.r_in, ns.r_out, ns.z0 or 0j)
        res = {"kind": k, "closed_form": M.round_modulus(ns.r_in, ns.r_out),
               **M.grid_modulus(reg, ns.resolution).as_dict()}
    elif k == "two_disks":
        reg = M.AnnulusRegion.two_disks(ns.r1, ns.r2)
        res = {"kind": k, "kappa": M.kappa(ns.r1, ns.r2), "closed_form": M.two_disk_modulus(ns.r1, ns.r2),
               **M.grid_modulus(reg, ns.resolution).as_dict()}
    elif k in ("sampled", "extract"):
        loops = M.read_polylines(ns.polylines)
        if len(loops) != 2:
            raise UsageError(f"{ns.polylines}: expected 2 loops (inner, outer), found {len(loops)}")
        reg = M.AnnulusRegion.sampled(loops[0], loops[1], ns.z0)
        if k == "sampled":
            res = {"kind": k, **M.grid_modulus(reg, ns.resolution).as_dict()}
        else:
            res = {"kind": k, **M.round_annulus_report(reg, ns.z0, ns.resolution, not ns.no_check).as_dict()}
    elif k == "sectors":
        n = ns.sectors
        if n < 1:
            raise UsageError("--sectors must be >= 1")
        ann = M.AnnulusRegion.round(ns.r_in, ns.r_out)
        quads = [M.SectorQuad(ns.r_in, ns.r_out, 2 * math.pi * i / n, 2 * math.pi * (i + 1) / n) for i in range(n)]
        res = {"kind": k, "sectors": n, **M.verify_quad_annulus_inequality(ann, quads, ns.resolution).as_dict()}
    else:
        if len(ns.rect) != 4 or len(ns.q1) != 2 or len(ns.q3) != 2 or len(ns.beta) != 2:
            raise UsageError("three_quads needs --rect x0,x1,y0,y1 --q1 a,b --q3 a,b --beta b1,b3")
        x0, x1, y0, y1 = ns.rect
        Q = M.RectQuad(x0, x1, y0, y1)
        rep = M.verify_three_quadrilateral_inequality(Q, M.RectQuad(ns.q1[0], ns.q1[1], y0, y1), None,
                                                      M.RectQuad(ns.q3[0], ns.q3[1], y0, y1),
                                                      ns.beta[0], ns.beta[1], ns.resolution)
        res = {"kind": k, **rep.as_dict()}
    res["sandwich"] = dict(M.SANDWICH_STATS)
    _emit(to_json(res), ns.out)
    return EXIT_OK


def cmd_pinchmodel(ns) -> int:
    from .pinch_model import PinchingModel, beltrami, modulus_law_rows
    rows = modulus_law_rows(ns.r, ns.t, ns.t0, ns.resolution)
    text = _csv(["t", "t0", "measured", "predicted", "relative_error"],
                [(t, "" if t0 is None else t0, m, p, m / p - 1) for t, t0, m, p in rows])
    _emit(text, ns.out)
    if ns.mu_image:
        from .render import scalar_image, write_image
        model = PinchingModel(ns.r, max(ns.t))
        n = ns.image_size
        xs = np.linspace(-ns.r, ns.r, n)
        Z = xs[None, :] - 1j * xs[:, None]
        inside = (np.abs(Z) > 1 / ns.r) & (np.abs(Z) < ns.r)
        mu = np.zeros(Z.shape)
        zi = Z[inside]
        s = np.abs(np.log(np.abs(zi)))
        away = np.all([np.abs(s - k) > 1e-9 for k in model.knots], axis=0)
        vals = np.zeros(zi.shape)
        vals[away] = np.abs(beltrami(zi[away], model))
        mu[inside] = vals
        write_image(scalar_image(mu, 0.0, 1.0, ~inside), ns.mu_image)
    return EXIT_OK


def cmd_pinch(ns) -> int:
    from .pinch_path import PathConfig, default_schedule, run_path
    cfg = PathConfig(ns.lambda0, default_schedule(ns.tmax, ns.steps), ns.grid, ns.julia, ns.seed)
    frames = Path(ns.frames) if ns.frames else None
    if frames:
        frames.mkdir(parents=True, exist_ok=True)

    def progress(k, row):
        if frames:
            from .render import render_julia
            from .sphere import RationalMap
            render_julia(RationalMap.quadratic(row.c), 256, 256, (-2, 2, -2, 2), frames / f"frame_{k:04d}.ppm")

    rep = run_path(cfg, progress)
    if ns.reverse:
        rep = rep.reversed()
    _emit(rep.to_csv(), ns.out)
    v = rep.verdicts
    sys.stderr.write(" ".join(f"{k}={v[k]}" for k in v) + "\n")
    return EXIT_OK


def cmd_obstruct(ns) -> int:
    from .multicurve import CoverData, build_matrix, verdict
    try:
        doc = json.loads(Path(ns.input).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {ns.input}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PinchlabError(f"{ns.input}: invalid JSON ({exc})") from exc
    data = CoverData.from_dict(doc)
    m = build_matrix(data)
    context = ns.context or doc.get("context", "general")
    v = verdict(m, context, bool(doc.get("connecting_arc_suspect", False)))
    _emit(to_json({"matrix": m.to_dict(), **v.to_dict()}), ns.out)
    return EXIT_OK


def cmd_distort(ns) -> int:
    from .distortion import UnivalentSample, distortion_report, mobius_invariance_check
    from .sphere import RationalMap
    out = []
    for eps in ns.eps:
        s = UnivalentSample.quadratic_perturbation(eps)
        rec = distortion_report(s, eps, ns.pairs, ns.configs, ns.seed, ns.resolution).as_dict()
        if ns.pre is not None:
            if len(ns.pre) != 4 or len(ns.post) != 4:
                raise UsageError("--pre/--post need four coefficients a,b,c,d")
            rec["mobius_invariance"] = mobius_invariance_check(
                s, RationalMap.mobius(*ns.pre), RationalMap.mobius(*ns.post), min(ns.pairs, 1000), ns.seed).as_dict()
        out.append(rec)
    _emit(to_json(out), ns.out)
    return EXIT_OK


def cmd_petal(ns) -> int:
    from .dynamics import periodic_points
    from .parabolic import abel_residual, build_petal, fatou_table
    f = _map(ns)
    g = f.iterate_map(ns.iterate) if ns.iterate > 1 else f
    cands = [p for p in periodic_points(g, 1) if p.classification == "parabolic"
             and p.rotation is not None and p.rotation.denominator == 1 and not p.location.is_infinity]
    if not cands:
        raise PinchlabError("no finite parabolic fixed point with multiplier 1 (try --iterate q)")
    rows = []
    summary = []
    for pp in cands:
        petal = build_petal(g, pp, ns.scale)
        res = abel_residual(g, petal, ns.samples)
        summary.append(f"# base={fmt(pp.z.real)},{fmt(pp.z.imag)} direction={fmt(petal.direction.real)},"
                       f"{fmt(petal.direction.imag)} abel_residual={fmt(res)}")
        for z, phi in fatou_table(g, petal, ns.samples):
            rows.append((pp.z.real, pp.z.imag, z.real, z.imag, phi.real, phi.imag))
    text = "\n".join(summary) + "\n" + _csv(["base_re", "base_im", "z_re", "z_im", "phi_re", "phi_im"], rows)
    _emit(text, ns.out)
    return EXIT_OK


COMMANDS = {"render": cmd_render, "periodic": cmd_periodic, "modulus": cmd_modulus, "pinchmodel": cmd_pinchmodel,
            "pinch": cmd_pinch, "obstruct": cmd_obstruct, "distort": cmd_distort, "petal": cmd_petal}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = parse_args(argv)
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (PinchlabError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
