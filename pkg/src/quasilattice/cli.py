"""``quasilattice`` command line.

Each subcommand parses its flags, makes one library call and prints the
result's own CSV/JSON serialization.  CSV output starts with a ``#`` line
recording the package version and the full argv; JSON output carries the
same record under ``"provenance"``.

Exit codes: 0 success, 1 domain/contract error, 2 parse error, 3 budget error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

from . import __version__
from ._io import csv_table, round_floats
from .core import (
    BINARY,
    Explicit,
    Patch,
    Periodic,
    Sturmian,
    ThueMorse,
    apply_excitation,
    encode,
    window_of,
)
from .errors import BudgetError, ContractError, DomainError, ParseError
from .gibbs import GibbsProblem, anneal_profile, exact_gibbs, metropolis_sample
from .hamiltonian import (
    add_chemical_potential,
    build_sturmian_hamiltonian,
    build_tm_hamiltonian,
    is_local_ground_state,
    load_spec,
    per_site_energy,
    relative_energy,
    window_energy,
)
from .local import exhaustive_search
from .rotation import RotationNumber
from .sbc import balanced_check, default_omega, discrepancy_profile, tiling_discrepancy
from .stability import ExcitationFamily, stability_scan
from .symbolic import (
    continued_fraction,
    empirical_frequency,
    forbidden_distances,
    sturmian_patch_frequency,
)
from .wang import complete_region, dump_grid, load_grid, load_tileset, parse_patch_2d, verify_tiling

GOLDEN = "quad:(-1+1*sqrt5)/2"
SYSTEMS = ("thue-morse", "sturmian", "periodic", "explicit")


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors surface as :class:`ParseError` for uniform exit codes."""

    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# -- shared argument groups --------------------------------------------------


def _patch(text, alphabet) -> Patch:
    # argparse drops a bare "--" even in "--flag=--" form and hands back []
    if not isinstance(text, str):
        raise ParseError("a patch value of '--' is swallowed by argparse; write it as 0:-,1:-")
    return Patch.parse(text, alphabet)


def _add_source(p, word_required=False):
    g = p.add_argument_group("configuration")
    g.add_argument("--system", choices=SYSTEMS, default="thue-morse")
    g.add_argument("--phi", default=GOLDEN, help="rotation number, 'quad:(a+b*sqrtD)/c' or 'dec:<value>:<digits>'")
    g.add_argument("--word", help="period for --system periodic, symbols for --system explicit")
    g.add_argument("--word-start", type=int, default=0, help="first site of an explicit word")


def _source(args):
    if args.system == "thue-morse":
        return ThueMorse()
    if args.system == "sturmian":
        return Sturmian(RotationNumber.parse(args.phi))
    if not args.word:
        raise ContractError(f"--system {args.system} needs --word")
    periodic = Periodic.from_text(args.word)
    if args.system == "periodic":
        return periodic
    return Explicit(args.word_start, tuple(int(s) for s in periodic.word), 0, periodic.alphabet)


def _add_spec(p):
    g = p.add_argument_group("hamiltonian")
    g.add_argument("--spec", help="declarative spec file; overrides --family")
    g.add_argument("--family", choices=("thue-morse", "sturmian"), default="thue-morse")
    g.add_argument("--lambda", dest="lam", type=float, default=0.25)
    g.add_argument("--r-max", type=int, default=8)
    g.add_argument("--p-max", type=int, default=8)
    g.add_argument("--phi", default=GOLDEN)
    g.add_argument("--alpha", type=float, default=4.0)
    g.add_argument("--k-max", type=int, default=64)
    g.add_argument(
        "--chem", action="append", default=[], metavar="PATCH=EPS", help="chemical potential, repeatable"
    )
    g.add_argument("--base", metavar="WORD", help="periodic base configuration instead of the family's own")


def _spec(args):
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = load_spec(fh.read())
    elif args.family == "thue-morse":
        spec = build_tm_hamiltonian(args.lam, args.r_max, args.p_max)
    else:
        spec = build_sturmian_hamiltonian(RotationNumber.parse(args.phi), args.alpha, args.k_max)
    for item in args.chem:
        patch_text, sep, eps = item.rpartition("=")
        if not sep:
            raise ParseError(f"--chem expects PATCH=EPS, got {item!r}")
        spec = add_chemical_potential(spec, Patch.parse(patch_text, spec.alphabet), float(eps))
    return spec


def _base(args, spec):
    if args.base:
        return Periodic(tuple(int(s) for s in encode(args.base, spec.alphabet)), spec.alphabet)
    source = spec.default_source()
    if source is None:
        raise ContractError("finite-range specs need --base")
    return source


def _add_output(p, formats=("csv", "json"), default="csv"):
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", help="write here instead of stdout")


# -- subcommands --------------------------------------------------------------
# each returns (csv_text, json_dict); text-only outputs use the csv slot


def cmd_generate(args):
    source = _source(args)
    win = window_of(source, args.start, args.len)
    rows = [(args.start + k, source.alphabet[s]) for k, s in enumerate(win.symbols)]
    if args.format == "text":
        return win.text + "\n", None
    return csv_table(["site", "symbol"], rows), {"start": args.start, "word": win.text}


def cmd_frequency(args):
    source = _source(args)
    rows = []
    for text in args.patch:
        patch = _patch(text, source.alphabet)
        exact = sturmian_patch_frequency(source.phi, patch) if isinstance(source, Sturmian) else None
        emp = empirical_frequency(source, patch, args.length)
        rows.append((patch.format(source.alphabet), exact, emp))
    js = {"length": args.length, "rows": [{"patch": p, "exact": e, "empirical": m} for p, e, m in rows]}
    return csv_table(["patch", "exact", "empirical"], rows), js


def cmd_forbidden(args):
    fs = forbidden_distances(RotationNumber.parse(args.phi), args.k_max)
    rows = [(fs.m, d) for d in fs.distances]
    return csv_table(["m", "distance"], rows), {"m": fs.m, "k_max": fs.k_max, "distances": list(fs.distances)}


def cmd_cf(args):
    quotients = continued_fraction(RotationNumber.parse(args.phi), args.depth)
    return csv_table(["index", "quotient"], enumerate(quotients, 1)), {"quotients": quotients}


def cmd_energy(args):
    spec = _spec(args)
    base = _base(args, spec)
    fn = per_site_energy if args.per_site else window_energy
    res = fn(spec, base, args.start, args.len)
    return res.to_csv(), res.to_dict()


def cmd_relative_energy(args):
    spec = _spec(args)
    base = _base(args, spec)
    overrides = {}
    for item in args.override.split(","):
        site, _, sym = item.partition(":")
        if not sym:
            raise ParseError(f"--override expects SITE:SYMBOL items, got {item!r}")
        overrides[int(site)] = sym.strip()
    res = relative_energy(spec, apply_excitation(base, overrides))
    return res.to_csv(), res.to_dict()


def cmd_ground_check(args):
    spec = _spec(args)
    res = is_local_ground_state(
        spec, _base(args, spec), args.width, args.max_flips, start=args.start, budget=args.budget
    )
    return res.to_csv(), res.to_dict()


def cmd_search(args):
    spec = _spec(args)
    res = exhaustive_search(spec, _base(args, spec), args.start, args.width, args.max_flips, args.budget)
    return res.to_csv(spec.alphabet), res.to_dict(spec.alphabet)


def cmd_discrepancy(args):
    source = _source(args)
    patch = _patch(args.patch, source.alphabet)
    omega = args.omega if args.omega is not None else default_omega(source, patch, args.prefix)
    rep = discrepancy_profile(source, patch, omega, _int_list(args.lengths), args.prefix, args.threads)
    return rep.to_csv(), rep.to_dict(source.alphabet)


def cmd_balance(args):
    source = _source(args)
    symbol = int(encode(args.symbol, source.alphabet)[0])
    worst = balanced_check(source, symbol, args.L_max)
    return csv_table(["L_max", "imbalance"], [(args.L_max, worst)]), {"L_max": args.L_max, "imbalance": worst}


def cmd_stability_scan(args):
    spec = _spec(args)
    base = _base(args, spec)
    favored = [_patch(t, spec.alphabet) for t in args.favored] or [p for p, _ in spec.chemical]
    if not favored:
        raise ContractError("give --favored patches or --chem potentials")
    sizes = _int_list(args.sizes)
    starts = _int_list(args.starts)
    if args.excitations == "single":
        family = ExcitationFamily.single_flips(base, starts)
    elif args.excitations == "block":
        family = ExcitationFamily.block_flips(base, sizes, starts)
    else:
        family = ExcitationFamily.hierarchical_flips(base, sizes, starts)
    curve = stability_scan(spec, favored, family)
    js = {"family": family.kind, "rows": [vars(r) for r in curve.rows]}
    return curve.to_csv(), js


def _gibbs_problem(args):
    spec = _spec(args)
    return spec, GibbsProblem(spec, args.volume_start, args.volume, _base(args, spec), args.beta)


def _observables(args, spec):
    if args.observable:
        return [_patch(t, spec.alphabet) for t in args.observable]
    return [Patch.word([s]) for s in range(spec.q)]


def cmd_gibbs(args):
    spec, problem = _gibbs_problem(args)
    obs = _observables(args, spec)
    if args.method == "exact":
        est = exact_gibbs(problem, obs)
    else:
        est = metropolis_sample(problem, args.sweeps, args.burn_in, args.seed, obs)
    return est.to_csv(), est.to_dict()


def cmd_anneal(args):
    spec, problem = _gibbs_problem(args)
    prof = anneal_profile(
        problem, _float_list(args.betas), _observables(args, spec), args.method, args.sweeps, args.burn_in, args.seed
    )
    return prof.to_csv(), prof.to_dict()


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_tiling_verify(args):
    tiles = load_tileset(_read(args.tiles))
    grid = load_grid(_read(args.grid), tiles)
    bonds = verify_tiling(grid)
    rows = [(b.a[0], b.a[1], b.b[0], b.b[1], b.direction) for b in bonds]
    js = {"broken": len(bonds), "bonds": [{"a": b.a, "b": b.b, "direction": b.direction} for b in bonds]}
    return csv_table(["x1", "y1", "x2", "y2", "direction"], rows), js


def cmd_tiling_complete(args):
    tiles = load_tileset(_read(args.tiles))
    res = complete_region(load_grid(_read(args.grid), tiles), args.max_cells, args.max_nodes)
    text = dump_grid(res.grid) if res.satisfiable else "UNSATISFIABLE\n"
    js = {"satisfiable": res.satisfiable, "nodes": res.nodes, "grid": dump_grid(res.grid) if res.grid else None}
    return text, js


def cmd_tiling_count(args):
    tiles = load_tileset(_read(args.tiles))
    grid = load_grid(_read(args.grid), tiles)
    dev = tiling_discrepancy(grid, parse_patch_2d(args.patch, tiles), args.omega)
    d = dev.to_dict()
    return csv_table(list(d), [list(d.values())]), d


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasilattice", description="Lattice-gas models of one-dimensional quasicrystals.")
    parser.add_argument("--version", action="version", version=f"quasilattice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="print a window of a configuration")
    _add_source(p)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--len", type=int, required=True)
    _add_output(p, ("text", "csv", "json"), "text")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("frequency", help="exact and empirical patch frequencies")
    _add_source(p)
    p.add_argument("--patch", action="append", required=True)
    p.add_argument("--length", type=int, default=100_000, help="prefix for the empirical count")
    _add_output(p)
    p.set_defaults(func=cmd_frequency)

    p = sub.add_parser("forbidden", help="forbidden distances of a Sturmian word")
    p.add_argument("--phi", default=GOLDEN)
    p.add_argument("--k-max", type=int, default=64)
    _add_output(p)
    p.set_defaults(func=cmd_forbidden)

    p = sub.add_parser("cf", help="continued fraction quotients")
    p.add_argument("--phi", default=GOLDEN)
    p.add_argument("--depth", type=int, default=12)
    _add_output(p)
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("energy", help="energy of a window of the base configuration")
    _add_spec(p)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--per-site", action="store_true", help="average over anchors instead of contained total")
    _add_output(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("relative-energy", help="H(Y|X) of a local excitation")
    _add_spec(p)
    p.add_argument("--override", required=True, metavar="SITE:SYM,...")
    _add_output(p)
    p.set_defaults(func=cmd_relative_energy)

    for name, func, helptext in (
        ("ground-check", cmd_ground_check, "local ground-state verdict on one window"),
        ("search", cmd_search, "lowest-energy excitation on one window"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_spec(p)
        p.add_argument("--start", type=int, default=0)
        p.add_argument("--width", type=int, required=True)
        p.add_argument("--max-flips", type=int)
        p.add_argument("--budget", type=int, default=2**24)
        _add_output(p)
        p.set_defaults(func=func)

    p = sub.add_parser("discrepancy", help="window discrepancy profile D(L)")
    _add_source(p)
    p.add_argument("--patch", required=True)
    p.add_argument("--omega", type=float, help="target frequency (default: exact or empirical)")
    p.add_argument("--lengths", required=True, help="comma list, 'a..b' ranges allowed")
    p.add_argument("--prefix", type=int, default=1_000_000)
    p.add_argument("--threads", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("balance", help="largest symbol-count gap between equal windows")
    _add_source(p)
    p.add_argument("--symbol", required=True)
    p.add_argument("--L-max", dest="L_max", type=int, default=64)
    _add_output(p)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("stability-scan", help="threshold eps*(size) along an excitation family")
    _add_spec(p)
    p.add_argument("--favored", action="append", default=[], help="favoured patch (default: --chem patches)")
    p.add_argument("--excitations", choices=("single", "block", "hierarchical"), default="block")
    p.add_argument("--sizes", default="1..16", help="block widths, or dyadic exponents k")
    p.add_argument("--starts", default="0..15", help="block starts, or dyadic block indices a")
    _add_output(p)
    p.set_defaults(func=cmd_stability_scan)

    for name, func in (("gibbs", cmd_gibbs), ("anneal", cmd_anneal)):
        p = sub.add_parser(name, help="finite-volume Gibbs estimate" if name == "gibbs" else "beta sweep")
        _add_spec(p)
        p.add_argument("--volume", type=int, required=True, help="number of free sites")
        p.add_argument("--volume-start", type=int, default=0)
        if name == "gibbs":
            p.add_argument("--beta", type=float, required=True)
        else:
            p.add_argument("--betas", required=True, help="ascending comma list")
            p.set_defaults(beta=0.0)
        p.add_argument("--method", choices=("exact", "metropolis"), default="exact")
        p.add_argument("--sweeps", type=int, default=100_000)
        p.add_argument("--burn-in", type=int, default=1_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--observable", action="append", default=[])
        _add_output(p, default="json")
        p.set_defaults(func=func)

    p = sub.add_parser("tiling-verify", help="list broken bonds of a Wang tiling")
    p.add_argument("--tiles", required=True)
    p.add_argument("--grid", required=True)
    _add_output(p)
    p.set_defaults(func=cmd_tiling_verify)

    p = sub.add_parser("tiling-complete", help="fill the holes of a partial tiling")
    p.add_argument("--tiles", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--max-cells", type=int, default=1000)
    p.add_argument("--max-nodes", type=int, default=1_000_000)
    _add_output(p, ("text", "json"), "text")
    p.set_defaults(func=cmd_tiling_complete)

    p = sub.add_parser("tiling-count", help="2D patch count against omega times placements")
    p.add_argument("--tiles", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--patch", required=True, help="'dx,dy:id;...' or a bare tile id")
    p.add_argument("--omega", type=float, default=0.0)
    _add_output(p)
    p.set_defaults(func=cmd_tiling_count)
    return parser


def _render(args, argv, result) -> str:
    text, js = result
    provenance = {"version": __version__, "argv": ["quasilattice", *argv]}
    if args.format == "json":
        return json.dumps({"provenance": provenance, **round_floats(js)}, indent=2) + "\n"
    return f"# quasilattice {__version__}: {shlex.join(provenance['argv'])}\n" + text


def run(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        output = _render(args, argv, args.func(args))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(output)
        else:
            stdout.write(output)
        return 0
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return 2
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return 3
    except (DomainError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
