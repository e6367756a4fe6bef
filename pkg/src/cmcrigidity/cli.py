"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import delaunay as dl
from . import weierstrass as ws
from .mesh import MAX_VERTICES, MeshPatch, grid_faces, write_obj
from .report import ReportDocument, atomic_write_text, serialize
from .rigidity import certify_delaunay, certify_minimal

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULT_LOOPS = {
    "catenoid": [(0.0, 0.0, 1.0)],
    "enneper": [(0.0, 0.0, 1.0)],
    "helicoid": [],
}
HELICOID_DEFAULT_SPAN = 6.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _vec(v) -> str:
    return " ".join(_fmt(x) for x in v)


def _parse_loop(text: str) -> ws.LoopSpec:
    try:
        cx, cy, rad = (float(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"loop must be 'cx,cy,radius', got {text!r}") from None
    if not rad > 0:
        raise UsageError("loop radius must be positive")
    return ws.LoopSpec.circle(complex(cx, cy), rad)


def _surface(name: str) -> ws.WeierstrassSurface:
    try:
        return ws.catalog(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
    else:
        try:
            atomic_write_text(out, text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None


# ---------------------------------------------------------------------------


def cmd_flux(args, stdout) -> int:
    s = _surface(args.surface)
    loop = _parse_loop(args.loop)
    if args.cw:
        loop = loop.reversed()
    fv = ws.flux(s, loop)
    zero = fv.norm <= args.tol
    lines = [
        f"surface: {s.name}",
        f"loop: circle center {_fmt(loop.center.real)} {_fmt(loop.center.imag)} radius {_fmt(loop.radius)} "
        + ("ccw" if loop.ccw else "cw"),
        f"flux: {_vec(fv.v)}",
        f"real_period: {_vec(fv.real_period)}",
        f"quadrature_error: {_fmt(fv.quadrature_error)}",
        f"real_period_zero: {'yes' if np.linalg.norm(fv.real_period) <= args.tol else 'no'}",
        "verdict: "
        + ("zero flux (associate immersions well defined on this loop)" if zero else "nonzero flux (rigid)"),
    ]
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_certify(args, stdout) -> int:
    inputs = {"subject": args.subject, "value": args.value, "tol": args.tol, "seed": args.seed}
    if args.subject == "minimal":
        s = _surface(args.value)
        specs = args.loop if args.loop is not None else [",".join(map(str, t)) for t in DEFAULT_LOOPS[s.name]]
        loops = [_parse_loop(t) for t in specs]
        inputs["loops"] = specs
        tol = ws.ZERO_TOL if args.tol is None else args.tol
        report = certify_minimal(s, loops, tol)
    else:
        try:
            shape = dl.shape_from_neck_curvature(float(args.value))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.n < 8:
            raise UsageError("--n must be at least 8")
        inputs["n"] = args.n
        tol = dl.GAP_TOL if args.tol is None else args.tol
        report = certify_delaunay(shape, args.n, tol)
    inputs["tol"] = tol
    doc = ReportDocument(report, inputs)
    text = serialize(doc)
    if args.out is None:
        stdout.write(text)
    else:
        _emit(text, args.out, stdout)
        line = f"verdict: {report.verdict.value}"
        if report.diagnostic:
            line += f" ({report.diagnostic})"
        stdout.write(line + "\n")
    return EXIT_OK


def minimal_grid(name: str, res: int, span: float | None) -> np.ndarray:
    """Parameter grid used for minimal-surface meshes."""
    if name == "enneper":
        u = np.linspace(-1.0, 1.0, res)
        return u[:, None] + 1j * u[None, :]
    if span is None:
        span = HELICOID_DEFAULT_SPAN if name == "helicoid" else 2.0 * math.pi * (res - 1) / res
    if name == "helicoid" and span >= 2.0 * math.pi:
        raise UsageError("helicoid patch spans a full turn; the log cover is limited to spans below 2 pi")
    u = np.linspace(-1.0, 1.0, res)
    v = np.linspace(-0.5 * span, 0.5 * span, res)
    return np.exp(u[:, None] + 1j * v[None, :])


def minimal_mesh(name: str, theta: float, res: int, span: float | None = None) -> MeshPatch:
    s = _surface(name)
    z = minimal_grid(name, res, span)
    base = 0j if name == "enneper" else 1 + 0j
    pts = ws.associate_points(ws.primitive_grid(s, z, base), theta)
    meta = {"surface": name, "theta": theta, "res": res, "tool_version": __version__}
    if span is not None:
        meta["span"] = span
    return MeshPatch(pts.reshape(-1, 3), grid_faces(res, res), None, meta)


def delaunay_mesh(r: float, res: int) -> MeshPatch:
    shape = dl.shape_from_neck_curvature(r)
    prof = dl.resample(dl.profile_solve(shape), res)
    meta = {"surface": "delaunay", "family": shape.family, "r": r, "theta": 0.0, "res": res, "tool_version": __version__}
    return dl.revolve_to_mesh(prof, res, meta)


def _mesh_text(mesh: MeshPatch) -> str:
    buf = io.StringIO()
    write_obj(mesh, buf)
    return buf.getvalue()


def cmd_mesh(args, stdout) -> int:
    if args.res < 8:
        raise UsageError("--res must be at least 8")
    if args.res * args.res > MAX_VERTICES:
        raise UsageError(f"--res {args.res} exceeds {MAX_VERTICES} vertices")
    if args.subject == "delaunay":
        if args.r is None:
            raise UsageError("mesh delaunay needs --r")
        if args.theta != 0 or args.sweep:
            raise UsageError("only theta = 0 is available for Delaunay meshes")
        try:
            mesh = delaunay_mesh(args.r, args.res)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _emit(_mesh_text(mesh), args.out, stdout)
        return EXIT_OK
    if args.sweep:
        if args.out is None:
            raise UsageError("--sweep needs --out")
        out = Path(args.out)
        for j in range(args.sweep):
            theta = 2.0 * math.pi * j / args.sweep
            mesh = minimal_mesh(args.subject, theta, args.res, args.span)
            _emit(_mesh_text(mesh), str(out.with_name(f"{out.stem}_theta{j:03d}{out.suffix}")), stdout)
        return EXIT_OK
    mesh = minimal_mesh(args.subject, args.theta, args.res, args.span)
    _emit(_mesh_text(mesh), args.out, stdout)
    return EXIT_OK


def cmd_theta_sweep(args, stdout) -> int:
    if args.n < 8:
        raise UsageError("--n must be at least 8")
    if args.subject == "delaunay":
        if args.r is None:
            raise UsageError("theta-sweep delaunay needs --r")
        try:
            shape = dl.shape_from_neck_curvature(args.r)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        sweep = dl.rigidity_gap_sweep(shape, args.n)
        header = [
            f"# theta-sweep delaunay r={_fmt(args.r)} family={shape.family} n={args.n}",
            "# columns: theta endpoint_gap",
            f"# tool_version={__version__}",
        ]
        rows = zip(sweep.theta, sweep.gap)
    else:
        s = _surface(args.surface)
        loop = _parse_loop(args.loop)
        p = ws.period(s, loop).value
        theta = dl.gap_theta_grid(args.n)
        # real period of the theta-associate immersion around the loop
        gap = np.linalg.norm((np.exp(1j * theta)[:, None] * p[None, :]).real, axis=1)
        header = [
            f"# theta-sweep minimal surface={s.name} loop={args.loop} n={args.n}",
            "# columns: theta real_period_norm",
            f"# tool_version={__version__}",
        ]
        rows = zip(theta, gap)
    text = "\n".join(header) + "\n" + "".join(f"{_fmt(t)} {_fmt(g)}\n" for t, g in rows)
    _emit(text, args.out, stdout)
    return EXIT_OK


def cmd_nodoid_solve(args, stdout) -> int:
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    stdout.write("# m r closed_form_2/(m+1)\n")
    for m in range(1, args.m + 1):
        r = dl.nodoid_closure_solve(m)
        stdout.write(f"{m} {_fmt(r)} {_fmt(2.0 / (m + 1))}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmcrigidity", description="Rigidity certificates for constant mean curvature surfaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=None, help="RNG seed, recorded for sampling-based checks")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("flux", help="flux and real period of a circular loop")
    f.add_argument("--surface", required=True)
    f.add_argument("--loop", required=True, help="cx,cy,radius")
    f.add_argument("--cw", action="store_true", help="traverse the loop clockwise")
    f.add_argument("--tol", type=float, default=ws.ZERO_TOL)
    f.set_defaults(func=cmd_flux)

    c = sub.add_parser("certify", help="write a rigidity report")
    c.add_argument("subject", choices=["minimal", "delaunay"])
    c.add_argument("value", help="catalog surface name, or neck curvature r")
    c.add_argument("--loop", action="append", help="cx,cy,radius (repeatable); minimal only")
    c.add_argument("--n", type=int, default=360, help="theta grid size; delaunay only")
    c.add_argument("--tol", type=float, default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    m = sub.add_parser("mesh", help="export an OBJ mesh")
    m.add_argument("subject", choices=["enneper", "catenoid", "helicoid", "delaunay"])
    m.add_argument("--theta", type=float, default=0.0)
    m.add_argument("--res", type=int, default=64)
    m.add_argument("--r", type=float)
    m.add_argument("--span", type=float, help="angular span of the catenoid/helicoid patch")
    m.add_argument("--sweep", type=int, default=0, help="write one mesh per theta = 2 pi j / SWEEP")
    m.add_argument("--out")
    m.set_defaults(func=cmd_mesh)

    t = sub.add_parser("theta-sweep", help="closure defect against the associate angle")
    t.add_argument("subject", choices=["delaunay", "minimal"])
    t.add_argument("--r", type=float)
    t.add_argument("--surface", default="catenoid")
    t.add_argument("--loop", default="0,0,1")
    t.add_argument("--n", type=int, default=360)
    t.add_argument("--out")
    t.set_defaults(func=cmd_theta_sweep)

    n = sub.add_parser("nodoid-solve", help="nodoids whose theta = pi neck image closes")
    n.add_argument("--m", type=int, default=5, help="largest turn count")
    n.set_defaults(func=cmd_nodoid_solve)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, stdout)
    except (UsageError, ws.DomainError) as exc:
        stderr.write(f"cmcrigidity: error: {exc}\n")
        return EXIT_USAGE
    except (ws.QuadratureError, dl.ProfileError, ArithmeticError) as exc:
        stderr.write(f"cmcrigidity: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
