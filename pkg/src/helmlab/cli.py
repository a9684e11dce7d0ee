"""Command-line entry point.

Subcommands: modes, spectrum, sweep, eigenfunction, quasimode,
check-theorem1, mesh-export. Global flags: --out DIR, --config FILE,
--jobs N, --seed HEX. Exit codes: 0 success, 1 usage error, 2 numerical
failure. Outputs are deterministic (no timestamps; 17-significant-digit
CSV) so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bem_dtn as bd
from . import ellipse_modes as em
from . import geometry as geo
from . import mesh as hm
from . import spectral_lab as lab
from .eigsolve import EigsolveError
from .interpolate import P1Interpolator
from .specfun import MathieuError, SpecfunError

NUMERICAL_ERRORS = (lab.LabError, bd.BemError, EigsolveError, hm.MeshError,
                    em.ModeError, MathieuError, SpecfunError,
                    geo.GeometryError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_mode(text: str):
    try:
        parity_code, m_str, n_str = text.split(":")
        parity = {"e": "even", "o": "odd"}[parity_code]
        return int(m_str), int(n_str), parity
    except (ValueError, KeyError) as exc:
        raise UsageError(f"mode spec must look like e:1:0, got {text!r}") from exc


def _parse_box(text: str):
    try:
        eps1, eps0 = (float(v) for v in text.split(","))
        return eps1, eps0
    except ValueError as exc:
        raise UsageError(f"box spec must be eps1,eps0 got {text!r}") from exc


def _domain_for(cavity: str, R: float) -> geo.DomainSpec:
    if cavity in ("small", "large"):
        return lab.lab_domain(cavity, R)
    if cavity == "none":
        return lab.lab_domain(None, R)
    raise UsageError(f"unknown cavity {cavity!r} (small, large or none)")


def build_parser() -> _Parser:
    p = _Parser(prog="helmlab", description=__doc__)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", default=None, help="hex seed for the eigensolver")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("modes", help="ellipse mode frequencies")
    m.add_argument("--a1", type=float, default=1.0)
    m.add_argument("--a2", type=float, default=None)
    m.add_argument("--mode", action="append", default=None,
                   help="parity:m:n, e.g. e:1:0 (repeatable)")

    s = sub.add_parser("spectrum", help="near-zero spectrum at one k")
    s.add_argument("--cavity", default=None)
    s.add_argument("--k", type=float, default=None)
    s.add_argument("--R", type=float, default=2.0)
    s.add_argument("--nev", type=int, default=8)
    s.add_argument("--backend", default="fourier", choices=["bem", "fourier"])
    s.add_argument("--h", type=float, default=None)

    w = sub.add_parser("sweep", help="frequency sweep with trajectories")
    w.add_argument("--cavity", default=None)
    w.add_argument("--kmin", type=float, default=2.5)
    w.add_argument("--kmax", type=float, default=12.5)
    w.add_argument("--step", type=float, default=0.025)
    w.add_argument("--R", type=float, default=1.5)
    w.add_argument("--nev", type=int, default=8)
    w.add_argument("--backend", default="fourier", choices=["bem", "fourier"])
    w.add_argument("--h", type=float, default=None)
    w.add_argument("--box", default="0.2,0.05", help="eps1,eps0")

    e = sub.add_parser("eigenfunction", help="sample |u| of one eigenvector")
    e.add_argument("--cavity", default=None)
    e.add_argument("--k", type=float, default=None)
    e.add_argument("--R", type=float, default=2.0)
    e.add_argument("--index", type=int, default=0)
    e.add_argument("--nev", type=int, default=6)
    e.add_argument("--grid", type=int, default=200)
    e.add_argument("--backend", default="fourier", choices=["bem", "fourier"])
    e.add_argument("--h", type=float, default=None)

    q = sub.add_parser("quasimode", help="cutoff quasimode quality")
    q.add_argument("--cavity", default=None)
    q.add_argument("--mode", default=None, help="parity:m:n")
    q.add_argument("--margin", type=float, default=0.02)
    q.add_argument("--width", type=float, default=0.18)

    t = sub.add_parser("check-theorem1", help="|mu_min| <= k^alpha eps(k)")
    t.add_argument("--cavity", default=None)
    t.add_argument("--mode", default=None, help="parity:m:n")
    t.add_argument("--alpha", type=float, default=4.6)
    t.add_argument("--R", type=float, default=2.0)
    t.add_argument("--h", type=float, default=None)

    x = sub.add_parser("mesh-export", help="write the HTMESH file")
    x.add_argument("--cavity", default=None)
    x.add_argument("--R", type=float, default=2.0)
    x.add_argument("--h", type=float, default=None)
    x.add_argument("--file", default="domain.mesh")
    return p


def _all_actions(parser):
    for action in parser._actions:
        yield action
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                yield from sub._actions


def _explicit_keys(parser, argv) -> set:
    """Dests actually provided on the command line (suppress-default pass)."""
    saved = []
    for action in _all_actions(parser):
        saved.append((action, action.default))
        if action.dest != "help":
            action.default = argparse.SUPPRESS
    try:
        ns = parser.parse_args(argv)
        return set(vars(ns))
    finally:
        for action, default in saved:
            action.default = default


def _apply_config(args, parser, argv):
    if not args.config:
        return args
    with open(args.config) as f:
        cfg = json.load(f)
    explicit = _explicit_keys(parser, argv)
    for key, value in cfg.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if key not in explicit:
            setattr(args, key, value)
    return args


_REQUIRED = {
    "modes": ("a2", "mode"),
    "spectrum": ("cavity", "k"),
    "sweep": ("cavity",),
    "eigenfunction": ("cavity", "k"),
    "quasimode": ("cavity", "mode"),
    "check-theorem1": ("cavity", "mode"),
    "mesh-export": ("cavity", "h"),
}


def _check_required(args):
    for dest in _REQUIRED.get(args.command, ()):
        if getattr(args, dest) is None:
            raise UsageError(f"--{dest} is required for {args.command} "
                             f"(flag or config file)")


def cmd_modes(args, out):
    modes = []
    for spec in args.mode:
        m, n, parity = _parse_mode(spec)
        mode = em.ellipse_mode_frequency(m, n, parity, a1=args.a1, a2=args.a2)
        modes.append({"parity": mode.parity, "m": mode.m, "n": mode.n,
                      "k": mode.k, "q": mode.q, "a": mode.a_char,
                      "xi0": mode.xi0})
    path = os.path.join(out, "modes.json")
    with open(path, "w", newline="\n") as f:
        json.dump({"format": 1, "a1": args.a1, "a2": args.a2,
                   "modes": modes}, f, indent=2)
        f.write("\n")
    print(path)
    return 0


def cmd_spectrum(args, out, seed):
    domain = _domain_for(args.cavity, args.R)
    recs = lab.spectrum_near_zero(domain, args.k, args.nev,
                                  dtn_backend=args.backend, h=args.h,
                                  seed=seed)
    path = os.path.join(out, "spectra.csv")
    lab.write_spectra_csv(path, lab.spectra_rows_from_records(args.k, recs))
    print(path)
    return 0


def cmd_sweep(args, out, seed):
    domain = _domain_for(args.cavity, args.R)
    traj = lab.sweep(domain, args.kmin, args.kmax, args.step, args.nev,
                     dtn_backend=args.backend, h=args.h, jobs=args.jobs,
                     seed=seed)
    csv_path = os.path.join(out, "spectra.csv")
    lab.write_spectra_csv(csv_path, lab.spectra_rows_from_trajectories(traj))
    eps1, eps0 = _parse_box(args.box)
    box = lab.BoxSpec(eps1=eps1, eps0=eps0, k_minus=float(traj.k_grid[0]),
                      k_plus=float(traj.k_grid[-1]))
    count, members = lab.box_count(traj, box)
    box_path = os.path.join(out, "boxcount.json")
    lab.write_boxcount_json(box_path, box, count, members)
    print(csv_path)
    print(box_path)
    return 0


def cmd_eigenfunction(args, out, seed):
    domain = _domain_for(args.cavity, args.R)
    h = args.h if args.h is not None else hm.meshwidth_rule(args.k)
    cache = lab.FemCache(domain, h)
    recs = lab.spectrum_near_zero(domain, args.k, args.nev,
                                  dtn_backend=args.backend,
                                  fem_cache=cache, seed=seed)
    if not 0 <= args.index < len(recs):
        raise UsageError(f"index {args.index} out of range (nev={len(recs)})")
    rec = recs[args.index]
    mesh = cache.mesh
    full = np.zeros(mesh.n_nodes, dtype=complex)
    full[cache.fem.node_of_dof] = rec.vector[:cache.M_dof.shape[0]]
    interp = P1Interpolator(mesh)
    R = args.R
    g = args.grid
    xs = np.linspace(-R, R, g)
    ys = np.linspace(-R, R, g)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    vals = interp.interpolate(full, pts, fill=np.nan + 0j)
    path = os.path.join(out, "field.csv")
    with open(path, "w", newline="\n") as f:
        f.write("# format: 1\n")
        f.write(f"# k,{args.k:.17g},mu_re,{rec.mu.real:.17g},"
                f"mu_im,{rec.mu.imag:.17g}\n")
        f.write("x,y,abs_u\n")
        for (x, y), v in zip(pts, vals):
            a = "nan" if np.isnan(v) else f"{abs(v):.17g}"
            f.write(f"{x:.17g},{y:.17g},{a}\n")
    print(path)
    return 0


def cmd_quasimode(args, out):
    m, n, parity = _parse_mode(args.mode)
    cavity = geo.build_cavity(args.cavity).spec
    mode = em.ellipse_mode_frequency(m, n, parity)
    cut = lab.default_cutoff(cavity, margin=args.margin, width=args.width)
    report = lab.quasimode_quality(mode, cavity, cutoff=cut)
    path = os.path.join(out, "quasimode.json")
    with open(path, "w", newline="\n") as f:
        f.write(report.to_json())
        f.write("\n")
    print(path)
    return 0


def cmd_check_theorem1(args, out, seed):
    m, n, parity = _parse_mode(args.mode)
    domain = _domain_for(args.cavity, args.R)
    mode = em.ellipse_mode_frequency(m, n, parity)
    result = lab.theorem1_check(domain, mode, args.alpha, h=args.h)
    path = os.path.join(out, "theorem1.json")
    result_out = dict(result, format=1)
    with open(path, "w", newline="\n") as f:
        json.dump(result_out, f, indent=2)
        f.write("\n")
    print(path)
    print(f"mu_min={result['mu_min']:.6g} bound={result['bound']:.6g} "
          f"passed={result['passed']}")
    return 0


def cmd_mesh_export(args, out):
    domain = _domain_for(args.cavity, args.R)
    mesh = hm.generate_mesh(domain, args.h)
    path = os.path.join(out, args.file)
    hm.write_mesh(mesh, path)
    print(path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args, parser, argv)
        _check_required(args)
        os.makedirs(args.out, exist_ok=True)
        seed = int(args.seed, 16) if args.seed is not None else None
        if args.command == "modes":
            return cmd_modes(args, args.out)
        if args.command == "spectrum":
            return cmd_spectrum(args, args.out, seed)
        if args.command == "sweep":
            return cmd_sweep(args, args.out, seed)
        if args.command == "eigenfunction":
            return cmd_eigenfunction(args, args.out, seed)
        if args.command == "quasimode":
            return cmd_quasimode(args, args.out)
        if args.command == "check-theorem1":
            return cmd_check_theorem1(args, args.out, seed)
        if args.command == "mesh-export":
            return cmd_mesh_export(args, args.out)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
