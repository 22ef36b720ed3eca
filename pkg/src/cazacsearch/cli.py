"""
Command-line interface.

Exit codes: 0 success, 2 input or constraint error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .correlate import aperiodic_ambiguity, periodic_ambiguity, sidelobe_metrics, write_grid
from .equiv import orbit
from .families import (
    InvalidSpec,
    NotOddPrime,
    QuadraticPhaseSpec,
    bjorck,
    is_prime,
    quadratic_phase,
    zadoff_chu,
)
from .search import (
    InsufficientData,
    SearchPlan,
    collect_solutions,
    filter_known,
    finiteness_verdict,
    run_search,
)
from .seqcore import SequenceFormatError, read_sequences, verify_cazac, write_sequences
from .solver import SolverConfig

SCHEMA_VERSION = 1
PSL_ISL_LENGTHS = (11, 13, 17, 23, 29, 37, 43, 47)
PARALLEL_COMMANDS = ("search", "reproduce-n7", "reproduce-n10", "reproduce-psl-isl")


class InputError(Exception):
    pass


class OutputError(Exception):
    pass


# --- file helpers ---------------------------------------------------------

def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


@contextmanager
def _writing(path):
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        fh = open(path, "w", newline="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    with fh:
        yield fh


def _read(path):
    try:
        with open(path) as fh:
            return read_sequences(fh)
    except SequenceFormatError as exc:
        raise InputError(f"{path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _read_single(path):
    xs = _read(path)
    if len(xs) != 1:
        raise InputError(f"{path}: expected exactly one sequence, found {len(xs)}")
    return xs[0]


def _dump_json(path, obj):
    with _writing(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(v):
    return f"{v:.17g}"


class Run:
    """Tracks outputs of one command so a manifest can describe them."""

    def __init__(self, name, argv, config, seed=None):
        self.name = name
        self.argv = list(argv)
        self.config = config
        self.seed = seed
        self.outputs = []
        self.runtime = {}

    def wrote(self, path):
        self.outputs.append(os.path.abspath(path))

    def manifest(self, path):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.name,
            "argv": self.argv,
            "cwd": os.getcwd(),
            "config": self.config,
            "seed": self.seed,
            "version": __version__,
            "outputs": {p: _sha256(p) for p in self.outputs},
            "runtime": self.runtime,
        }
        _dump_json(path, doc)


def _config(args):
    skip = {"func", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _solver_config(args):
    return SolverConfig(
        gradient_tol=args.gradient_tol,
        step_tol=args.step_tol,
        cost_tol=args.cost_tol,
        max_iterations=args.max_iterations,
        acceptance_cost=args.acceptance_cost,
    )


# --- commands -------------------------------------------------------------

def cmd_generate(args, run):
    try:
        if args.family == "bjorck":
            x = bjorck(args.n)
            label = f"family=bjorck n={args.n}"
        else:
            spec = QuadraticPhaseSpec(args.family, args.n, args.k)
            x = quadratic_phase(spec)
            label = f"family={args.family} n={args.n}"
            if args.family == "wiener":
                label += f" k={args.k}"
    except (InvalidSpec, NotOddPrime) as exc:
        raise InputError(str(exc)) from None
    rep = verify_cazac(x, 1e-12)
    verify = (f"verify max_modulus_error={rep.max_modulus_error:.3e} "
              f"max_autocorrelation={rep.max_autocorrelation:.3e} "
              f"pass={'true' if rep.passed else 'false'}")
    if args.out:
        with _writing(args.out) as fh:
            write_sequences(fh, [x], [label])
            fh.write(f"# {verify}\n")
        run.wrote(args.out)
    else:
        write_sequences(sys.stdout, [x], [label])
        sys.stdout.write(f"# {verify}\n")
    return 0


def _search_outputs(report, plan, out_dir, run, verdict_kwargs=None):
    sol_path = os.path.join(out_dir, "solutions.txt")
    rep_path = os.path.join(out_dir, "report.json")
    with _writing(sol_path) as fh:
        write_sequences(fh, report.solutions,
                        [f"n={plan.n} seed={plan.seed} trials={report.trials} unique={report.unique}"])
    run.wrote(sol_path)
    try:
        v = finiteness_verdict(report, **(verdict_kwargs or {}))
        verdict = dict(v.__dict__)
    except InsufficientData as exc:
        verdict = {"verdict": None, "reason": str(exc)}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "plan": {
            "n": plan.n,
            "trials": plan.trials,
            "seed": plan.seed,
            "checkpoints": list(plan.checkpoints),
            "solver": plan.solver.as_dict(),
        },
        "report": report.to_dict(),
        "verdict": verdict,
    }
    _dump_json(rep_path, doc)
    run.wrote(rep_path)
    run.runtime["elapsed_seconds"] = report.elapsed
    return doc


def cmd_search(args, run):
    if args.n < 2:
        raise InputError("n must be >= 2")
    try:
        plan = SearchPlan(args.n, args.trials, args.seed, _solver_config(args))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _check_writable_dir(args.out)
    report = run_search(plan, workers=args.workers)
    doc = _search_outputs(report, plan, args.out, run)
    run.manifest(os.path.join(args.out, "manifest.json"))
    rep = doc["report"]
    print(f"n={plan.n} trials={plan.trials} unique={rep['unique']} "
          f"converged={rep['converged']} non_converged={rep['non_converged']} "
          f"max_accepted_cost={rep['max_accepted_cost']:.3e} "
          f"verdict={doc['verdict']['verdict']}")
    return 0


def _check_writable_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {path}: {exc.strerror or exc}") from None
    if not os.access(path, os.W_OK):
        raise OutputError(f"output directory {path} is not writable")


def _five_numbers(values):
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), q))


def _reference_sequences(n):
    refs = []
    if n % 2:
        refs.append(("zadoff-chu", zadoff_chu(n)))
    if n > 2 and is_prime(n):
        refs.append(("bjorck", bjorck(n)))
    return refs


def stats_rows(paths, references=True):
    """Rows (source, kind, label, n, psl, isl, cazac) behind the box plots."""
    rows = []
    lengths = []
    for path in paths:
        xs = _read(path)
        psl, isl = [], []
        for i, x in enumerate(xs):
            if len(x) < 2:
                raise InputError(f"{path}: record {i} has length {len(x)} < 2")
            m = sidelobe_metrics(x)
            ok = verify_cazac(x, 1e-8).passed
            rows.append((path, "sequence", str(i), len(x), m.psl, m.isl, ok))
            psl.append(m.psl)
            isl.append(m.isl)
            if len(x) not in lengths:
                lengths.append(len(x))
        if xs:
            ns = sorted({len(x) for x in xs})
            n_label = ns[0] if len(ns) == 1 else 0
            sp, si = _five_numbers(psl), _five_numbers(isl)
            for stat in sp:
                rows.append((path, "summary", stat, n_label, sp[stat], si[stat], ""))
    if references:
        for n in sorted(lengths):
            for name, x in _reference_sequences(n):
                m = sidelobe_metrics(x)
                rows.append(("", "reference", name, n, m.psl, m.isl,
                             verify_cazac(x, 1e-8).passed))
    return rows


def _write_stats(fh, rows):
    fh.write("source,kind,label,n,psl,isl,cazac\n")
    for src, kind, label, n, psl, isl, ok in rows:
        flag = "" if ok == "" else ("true" if ok else "false")
        fh.write(f"{src},{kind},{label},{n},{_fmt(psl)},{_fmt(isl)},{flag}\n")


def cmd_stats(args, run):
    rows = stats_rows(args.files, references=args.references)
    if args.out:
        with _writing(args.out) as fh:
            _write_stats(fh, rows)
        run.wrote(args.out)
    else:
        _write_stats(sys.stdout, rows)
    return 0


def cmd_ambiguity(args, run):
    x = _read_single(args.file)
    grid = periodic_ambiguity(x) if args.kind == "periodic" else aperiodic_ambiguity(x)
    with _writing(args.out) as fh:
        write_grid(fh, grid)
    run.wrote(args.out)
    print(f"n={grid.n} kind={grid.kind} max_off_origin={grid.max_off_origin():.9g}")
    return 0


def cmd_orbit(args, run):
    x = _read_single(args.file)
    rep = verify_cazac(x, 1e-8)
    if not rep.passed:
        raise InputError(
            f"{args.file}: input is not CAZAC at 1e-8 (modulus error "
            f"{rep.max_modulus_error:.3e}, autocorrelation {rep.max_autocorrelation:.3e})"
        )
    orb = orbit(x, args.max_word_len)
    with _writing(args.out) as fh:
        write_sequences(fh, orb.members, [f"orbit n={len(x)} count={orb.count} sweeps={orb.sweeps}"])
    run.wrote(args.out)
    print(f"count={orb.count}")
    return 0


def cmd_filter(args, run):
    xs = _read(args.file)
    n = args.n
    if n is None:
        ns = {len(x) for x in xs}
        if len(ns) != 1:
            raise InputError("cannot infer n; pass --n")
        n = ns.pop()
    try:
        part = filter_known(xs, n, args.max_word_len)
    except (ValueError, InvalidSpec, NotOddPrime) as exc:
        raise InputError(str(exc)) from None
    counts = {}
    for lab in part.labels:
        counts[lab] = counts.get(lab, 0) + 1
    with _writing(args.known) as fh:
        write_sequences(fh, part.known, [f"known n={n} count={len(part.known)}"]
                        + [f"{lab}={c}" for lab, c in sorted(counts.items())])
    run.wrote(args.known)
    with _writing(args.new) as fh:
        write_sequences(fh, part.new, [f"new n={n} count={len(part.new)}"])
    run.wrote(args.new)
    print(f"known={len(part.known)} new={len(part.new)}")
    return 0


def _reproduce_search(args, run, n, trials):
    _check_writable_dir(args.out)
    plan = SearchPlan(n, trials, args.seed, SolverConfig())
    report = run_search(plan, workers=args.workers)
    doc = _search_outputs(report, plan, args.out, run)
    rep = doc["report"]
    print(f"n={n} trials={trials} unique={rep['unique']} "
          f"max_accepted_cost={rep['max_accepted_cost']:.3e} "
          f"verdict={doc['verdict']['verdict']}")
    return report


def cmd_reproduce_n7(args, run):
    report = _reproduce_search(args, run, 7, args.trials)
    part = filter_known(report.solutions, 7)
    for name, xs in (("known.txt", part.known), ("new.txt", part.new)):
        path = os.path.join(args.out, name)
        with _writing(path) as fh:
            write_sequences(fh, xs, [f"{name[:-4]} n=7 count={len(xs)}"])
        run.wrote(path)
    print(f"known={len(part.known)} new={len(part.new)}")
    run.manifest(os.path.join(args.out, "manifest.json"))
    return 0


def cmd_reproduce_n10(args, run):
    _reproduce_search(args, run, 10, args.trials)
    run.manifest(os.path.join(args.out, "manifest.json"))
    return 0


def cmd_reproduce_psl_isl(args, run):
    _check_writable_dir(args.out)
    files = []
    for n in args.lengths:
        rep = collect_solutions(n, args.count, args.seed, workers=args.workers,
                                max_trials=args.max_trials)
        path = os.path.join(args.out, f"solutions_n{n}.txt")
        with _writing(path) as fh:
            write_sequences(fh, rep.solutions,
                            [f"n={n} seed={args.seed} trials={rep.trials} unique={rep.unique} "
                             f"non_converged={rep.non_converged}"])
        run.wrote(path)
        files.append(path)
        run.runtime[f"n{n}_elapsed_seconds"] = rep.elapsed
        print(f"n={n} solutions={rep.unique} trials={rep.trials} non_converged={rep.non_converged}")
    stats_path = os.path.join(args.out, "stats.csv")
    rows = stats_rows(files, references=True)
    with _writing(stats_path) as fh:
        _write_stats(fh, rows)
    run.wrote(stats_path)
    run.manifest(os.path.join(args.out, "manifest.json"))
    return 0


def cmd_rerun(args, run):
    try:
        with open(args.manifest) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot load manifest {args.manifest}: {exc}") from None
    argv = list(doc["argv"])
    # single-threaded commands have no --workers flag; the override is moot there
    if args.workers is not None and doc["command"] in PARALLEL_COMMANDS:
        argv = _replace_workers(argv, args.workers)
    here = os.getcwd()
    os.chdir(doc["cwd"])
    try:
        code = main(argv)
    finally:
        os.chdir(here)
    if code != 0:
        return code
    bad = [p for p, digest in doc["outputs"].items()
           if not os.path.exists(p) or _sha256(p) != digest]
    for p in bad:
        print(f"digest mismatch: {p}", file=sys.stderr)
    print(f"outputs={len(doc['outputs'])} mismatched={len(bad)}")
    return 2 if bad else 0


def _replace_workers(argv, workers):
    out = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--workers":
            skip = True
            continue
        if a.startswith("--workers="):
            continue
        out.append(a)
    return out + ["--workers", str(workers)]


# --- parser ---------------------------------------------------------------

def _add_solver_flags(p):
    d = SolverConfig()
    p.add_argument("--gradient-tol", type=float, default=d.gradient_tol)
    p.add_argument("--step-tol", type=float, default=d.step_tol)
    p.add_argument("--cost-tol", type=float, default=d.cost_tol)
    p.add_argument("--max-iterations", type=int, default=d.max_iterations)
    p.add_argument("--acceptance-cost", type=float, default=d.acceptance_cost)


def _add_workers(p):
    p.add_argument("--workers", type=int, default=1,
                   help="worker threads; never changes output content")


def build_parser():
    parser = argparse.ArgumentParser(prog="cazac", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a named-family CAZAC sequence")
    p.add_argument("family", choices=["zadoff-chu", "p4", "wiener", "bjorck"])
    p.add_argument("n", type=int)
    p.add_argument("--k", type=int, default=1, help="Wiener parameter")
    p.add_argument("-o", "--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("search", help="multi-start least-squares search")
    p.add_argument("n", type=int)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    _add_solver_flags(p)
    _add_workers(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("stats", help="PSL/ISL table with box-plot summaries")
    p.add_argument("files", nargs="+")
    p.add_argument("--references", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("-o", "--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ambiguity", help="normalized ambiguity magnitude grid")
    p.add_argument("file")
    p.add_argument("--kind", choices=["periodic", "aperiodic"], default="aperiodic")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("orbit", help="equivalence-transform orbit of a CAZAC sequence")
    p.add_argument("file")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--max-word-len", type=int, default=8)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("filter", help="split solutions into known-family orbits and new")
    p.add_argument("file")
    p.add_argument("--n", type=int)
    p.add_argument("--known", required=True)
    p.add_argument("--new", required=True)
    p.add_argument("--max-word-len", type=int, default=8)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("reproduce-n7", help="length-7 enumeration recipe")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--out", required=True)
    _add_workers(p)
    p.set_defaults(func=cmd_reproduce_n7)

    p = sub.add_parser("reproduce-n10", help="length-10 finiteness recipe")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--out", required=True)
    _add_workers(p)
    p.set_defaults(func=cmd_reproduce_n10)

    p = sub.add_parser("reproduce-psl-isl", help="prime-length PSL/ISL comparison recipe")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--lengths", type=int, nargs="+", default=list(PSL_ISL_LENGTHS))
    p.add_argument("--max-trials", type=int, default=1_000_000)
    p.add_argument("--out", required=True)
    _add_workers(p)
    p.set_defaults(func=cmd_reproduce_psl_isl)

    p = sub.add_parser("rerun", help="re-execute a manifest and compare output digests")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    run = Run(args.command, argv, _config(args), getattr(args, "seed", None))
    try:
        code = args.func(args, run)
        manifest = getattr(args, "manifest", None)
        if manifest and args.command != "rerun":
            run.manifest(manifest)
        return code
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
