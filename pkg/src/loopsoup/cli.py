"""Command-line front end.

Every output starts with a manifest comment line recording the command and
all effective parameters, so a file is reproducible from its own header.
Outputs are deterministic for a fixed (input, flags, seed) triple.

Exit codes: 0 success, 2 malformed input data, 3 numeric failure,
4 bad arguments or unreadable files.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from .errors import ConfigError, NumericError, ValidationError
from .freegroup import (enumerate_geodesic_classes, format_word, parse_word)
from .graphs import parse_graph, spanning_tree_frame
from .signature import degree_and_lead
from .soup import (MeasureConfig, dumps_soup, enumerate_measure, occupation,
                   sample_soup, spectral_radius, total_mass)
from .spectra import class_intensity, contractible_intensity, ihara_check, solve_rho
from .fourier import (homology1_field_law, homology1_intensity,
                      homology1_intensity_mod, homology2_field_law,
                      homology2_intensity)

__version__ = "0.1.0"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _load_graph(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_graph(text)


def _manifest(command: str, params: dict) -> str:
    body = " ".join(f"{k}={v}" for k, v in params.items())
    return f"# loopsoup {command} version={__version__} {body}".rstrip()


def _emit(args, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    return repr(float(x))


def _class_label(cls) -> str:
    return format_word(cls.word) if not cls.is_trivial else "e"


def cmd_validate(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    lines = [
        _manifest("validate", {"graph": args.graph}),
        f"vertices: {g.num_vertices}",
        f"edges: {len(g.edges)}",
        f"rank: {frame.rank}",
        "lam: " + " ".join(_fmt(v) for v in g.lam),
        f"spectral_radius: {_fmt(spectral_radius(g))}",
    ]
    try:
        lines.append(f"mass: {_fmt(total_mass(g))}")
    except NumericError:
        lines.append("mass: infinite (kappa == 0)")
    _emit(args, lines)


def cmd_sample(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    cfg = MeasureConfig(alpha=args.alpha, n_max=args.n_max,
                        tail_tol=args.tail_tol, seed=args.seed)
    soup = sample_soup(g, frame, cfg)
    manifest = _manifest("sample", {
        "graph": args.graph, "alpha": args.alpha, "n_max": args.n_max,
        "tail_tol": args.tail_tol, "seed": args.seed,
        "loops": len(soup.loops), "occupation": args.occupation,
    })
    if args.occupation:
        lines = [manifest, "u,v,N,Ncheck"]
        lines += [f"{u},{v},{n},{c}" for u, v, n, c in occupation(soup).rows()]
    else:
        lines = [manifest] + dumps_soup(soup).splitlines()
    _emit(args, lines)


def cmd_enumerate(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    em = enumerate_measure(g, frame, args.n_max)
    manifest = _manifest("enumerate", {
        "graph": args.graph, "n_max": args.n_max, "tail": _fmt(em.tail),
    })
    lines = [manifest, "class,length,mult,intensity"]
    for cls in sorted(em.masses, key=lambda c: (c.length, c.word)):
        lines.append(f"{_class_label(cls)},{cls.length},{cls.multiplicity},"
                     f"{_fmt(em.masses[cls])}")
    _emit(args, lines)


def cmd_homotopy(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    rho = solve_rho(g, args.s)
    manifest = _manifest("homotopy", {
        "graph": args.graph, "max_len": args.max_len, "s": args.s,
    })
    lines = [manifest, "class,length,mult,intensity"]
    trivial_val, _ = contractible_intensity(g) if args.s == 1.0 else (None, None)
    if trivial_val is not None:
        lines.append(f"e,0,1,{_fmt(trivial_val)}")
    for cls in enumerate_geodesic_classes(frame.rank, args.max_len):
        val = class_intensity(g, frame, cls, s=args.s, rho=rho)
        lines.append(f"{_class_label(cls)},{cls.length},{cls.multiplicity},"
                     f"{_fmt(val)}")
    _emit(args, lines)


def _parse_ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}") from None


def cmd_h1(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    r = frame.rank
    if args.h is not None:
        hs = [_parse_ints(args.h, "--h")]
    else:
        hs = [tuple(int(x) for x in np.array(idx) - args.h_range)
              for idx in np.ndindex(*([2 * args.h_range + 1] * r))]
    value_col = "probability" if args.field else "intensity"
    manifest = _manifest("h1", {
        "graph": args.graph, "M": args.grid, "mod": args.mod,
        "field": args.field, "alpha": args.alpha,
    })
    lines = [manifest, ",".join([f"h{i}" for i in range(1, r + 1)] + [value_col])]
    for h in hs:
        if args.field:
            val = homology1_field_law(g, frame, args.alpha, h, M=args.grid)
        elif args.mod is not None:
            val = homology1_intensity_mod(g, frame, h, args.mod)
        else:
            val = homology1_intensity(g, frame, h, M=args.grid)
        lines.append(",".join([str(x) for x in h] + [_fmt(val)]))
    _emit(args, lines)


def cmd_h2(args) -> None:
    g = _load_graph(args.graph)
    frame = spanning_tree_frame(g)
    r = frame.rank
    q = r * (r - 1) // 2
    p = args.p
    if args.m is not None:
        ms = [_parse_ints(args.m, "--m")]
        if len(ms[0]) != q:
            raise ConfigError(f"--m needs {q} entries (pairs i<j in lex order)")
    else:
        ms = [tuple(int(x) for x in idx) for idx in np.ndindex(*([p] * q))]
    pairs = [(i, j) for i in range(1, r + 1) for j in range(i + 1, r + 1)]
    value_col = "probability" if args.field else "intensity"
    manifest = _manifest("h2", {
        "graph": args.graph, "p": p, "field": args.field,
        "alpha": args.alpha, "M": args.grid,
    })
    lines = [manifest, f"m,p,{value_col}"]
    for m in ms:
        mdict = dict(zip(pairs, m))
        if args.field:
            val = homology2_field_law(g, frame, args.alpha, mdict, p, M=args.grid)
        else:
            val = homology2_intensity(g, frame, mdict, p, alpha=args.alpha)
        lines.append(f"{' '.join(str(x) for x in m)},{p},{_fmt(val)}")
    _emit(args, lines)


def cmd_zeta(args) -> None:
    g = _load_graph(args.graph)
    series = ihara_check(g, args.max_degree)
    manifest = _manifest("zeta", {
        "graph": args.graph, "max_degree": args.max_degree,
        "agree": series.agree(),
    })
    lines = [manifest, "degree,lhs,rhs,diff"]
    for n, lhs, rhs, diff in series.rows():
        lines.append(f"{n},{lhs},{rhs},{diff}")
    _emit(args, lines)


def cmd_signature(args) -> None:
    word = parse_word(args.word)
    d, poly = degree_and_lead(word, max_degree=args.max_degree)
    manifest = _manifest("signature", {
        "word": format_word(word), "degree": d, "rank": poly.rank,
    })
    lines = [manifest, "lyndon_word,coordinate"]
    for lw, coord in poly.sorted_coords():
        lines.append(f"{' '.join(str(x) for x in lw)},{coord}")
    _emit(args, lines)


def _build_parser() -> _Parser:
    parser = _Parser(prog="loopsoup",
                     description="Loop measures and Poisson loop ensembles "
                                 "on finite weighted graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, graph=True):
        p = sub.add_parser(name, help=help_)
        if graph:
            p.add_argument("graph", help="graph description file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "parse a graph and report its basic data")

    p = add("sample", cmd_sample, "draw one Poisson loop ensemble")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=24, dest="n_max")
    p.add_argument("--tail-tol", type=float, default=1e-8, dest="tail_tol")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--occupation", action="store_true",
                   help="emit the oriented-edge occupation field instead")

    p = add("enumerate", cmd_enumerate, "exhaustive class masses up to a length")
    p.add_argument("--n-max", type=int, default=12, dest="n_max")

    p = add("homotopy", cmd_homotopy, "analytic intensities per homotopy class")
    p.add_argument("--max-len", type=int, default=3, dest="max_len")
    p.add_argument("--s", type=float, default=1.0)

    p = add("h1", cmd_h1, "winding-number intensities or field law")
    p.add_argument("--h", help="single winding vector, e.g. '1,0'")
    p.add_argument("--h-range", type=int, default=3, dest="h_range")
    p.add_argument("--M", type=int, default=None, dest="grid")
    p.add_argument("--mod", type=int, default=None,
                   help="aliased intensity mod this integer")
    p.add_argument("--field", action="store_true")
    p.add_argument("--alpha", type=float, default=1.0)

    p = add("h2", cmd_h2, "second-homology intensities or field law mod p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", help="skew entries for pairs i<j in lex order")
    p.add_argument("--field", action="store_true")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--M", type=int, default=8, dest="grid")

    p = add("zeta", cmd_zeta, "geodesic determinant identity, exact series")
    p.add_argument("--max-degree", type=int, default=8, dest="max_degree")

    p = add("signature", cmd_signature,
            "critical degree and leading Lie term of a word", graph=False)
    p.add_argument("--word", required=True, help="word like '+1 -2 +1 +2'")
    p.add_argument("--max-degree", type=int, default=8, dest="max_degree")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
