"""Command line: enumerate | eval | sweep | facet.

Exit codes: 0 success, 2 usage or parse error, 3 solver or policy error,
4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import (
    Hyperplane,
    bound,
    facet_through,
    grow_face,
    lower_bound,
    read_facets,
    symmetry_orbit,
    vicinity_seed,
)
from .lp import RowGenerationLimit, SolverError
from .measures import (
    MAX_ROM_QUBITS,
    ConsistencyError,
    PolicyError,
    full_report,
)
from .pauli import CapacityError
from .stabilizers import (
    EnumerationError,
    load_or_enumerate,
    read_cache,
    stabilizer_count,
    write_cache,
)
from .states import InvalidStateError, StateParseError, parse_state, werner_vector

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
ALL_QUANTIFIERS = ("M", "W", "ST", "RoM")

log = logging.getLogger("magicpoly")


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


def fmt(x) -> str:
    """At least 9 significant digits, trailing zeros kept for a fixed width."""
    if x is None:
        return ""
    return f"{float(x):#.12g}"


def _cache_path(args, n: int) -> Path | None:
    if not args.stab_cache:
        return None
    root = Path(args.stab_cache)
    if root.suffix:
        return root
    root.mkdir(parents=True, exist_ok=True)
    return root / f"stabilizers_N{n}.bin"


def _stabs(args, n: int):
    return load_or_enumerate(n, _cache_path(args, n), allow_large=args.allow_large)


def _library(args, n: int) -> list[Hyperplane]:
    if not args.facet_lib or not Path(args.facet_lib).exists():
        return []
    return [h for h in read_facets(args.facet_lib) if h.n_qubits == n]


def _quantifiers(text: str | None, n: int) -> tuple[str, ...]:
    if text is None:
        return ALL_QUANTIFIERS if n <= MAX_ROM_QUBITS - 1 else ("M", "W", "ST")
    chosen = tuple(q.strip() for q in text.split(",") if q.strip())
    bad = [q for q in chosen if q not in ALL_QUANTIFIERS]
    if bad or not chosen:
        raise UsageError(f"quantifiers must come from {','.join(ALL_QUANTIFIERS)}, got {text!r}")
    return tuple(q for q in ALL_QUANTIFIERS if q in chosen)


def _manifest(n: int, stabs, quantifiers, raw: bool) -> str:
    return f"# magicpoly {__version__} N={n} D_S={stabs.count} quantifiers={','.join(quantifiers)} raw={int(raw)}"


# --- subcommands ----------------------------------------------------------

def cmd_enumerate(args) -> int:
    n = args.n
    if n < 1:
        raise UsageError("N must be at least 1")
    path = Path(args.cache) if args.cache else _cache_path(args, n)
    t = time.perf_counter()
    if path is not None and path.exists():
        stabs = read_cache(path)
        if stabs.n_qubits != n or stabs.count != stabilizer_count(n):
            raise VerificationError(f"{path}: holds {stabs.count} states for N={stabs.n_qubits}")
        action = "validated"
    else:
        stabs = load_or_enumerate(n, None, allow_large=args.allow_large)
        action = "enumerated"
        if path is not None:
            write_cache(stabs, path)
            action += f", wrote {path}"
    if stabs.count != stabilizer_count(n):
        raise VerificationError(f"found {stabs.count} states, expected {stabilizer_count(n)}")
    print(f"D_S={stabs.count}")
    print(f"# {action} in {time.perf_counter() - t:.3f} s", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    expr = parse_state(args.state)
    v = expr.vector()
    n = v.n_qubits
    quantifiers = _quantifiers(args.quantifiers, n)
    stabs = _stabs(args, n)
    rep = full_report(
        v,
        stabs,
        quantifiers,
        label=expr.label,
        search_budget=args.search,
        library=_library(args, n),
    )
    out = rep.as_dict()
    out["manifest"] = {
        "version": __version__,
        "n_qubits": n,
        "D_S": stabs.count,
        "timings": rep.timings,
        "flags": {"quantifiers": list(quantifiers), "search": args.search},
    }
    if args.format == "text":
        for key in ("M", "W", "st_norm", "rom"):
            if out[key] is not None:
                print(f"{key}={fmt(out[key])}")
        print(f"magic_detected={out['magic_detected']}")
    else:
        print(json.dumps(out, indent=2))
    return EXIT_OK


def _sweep_grid(start: float, end: float, step: float) -> list[float]:
    if not (0 <= start <= end <= 1) or step <= 0:
        raise UsageError("need 0 <= mu-start <= mu-end <= 1 and mu-step > 0")
    count = int(np.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def cmd_sweep(args) -> int:
    base = parse_state(args.state).vector()
    n = base.n_qubits
    quantifiers = _quantifiers(args.quantifiers, n)
    if "RoM" in quantifiers and n > MAX_ROM_QUBITS:
        raise PolicyError(f"robustness of magic is refused for N={n}")
    if args.quantifiers is None and n >= MAX_ROM_QUBITS:
        print(f"# RoM omitted by default for N={n}", file=sys.stderr)
    stabs = _stabs(args, n)
    grid = _sweep_grid(args.mu_start, args.mu_end, args.mu_step)

    def row(mu: float):
        return full_report(werner_vector(base, mu), stabs, quantifiers, label=f"mu={mu}")

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        reports = list(pool.map(row, grid))

    names = {"M": "M", "W": "W" if args.raw else "W_plus_1", "ST": "ST", "RoM": "RoM"}
    lines = []
    for mu, rep in zip(grid, reports):
        vals = {
            "M": rep.M,
            "W": rep.W if args.raw else rep.W + 1 if rep.W is not None else None,
            "ST": rep.st_norm if args.raw else max(1.0, rep.st_norm) if rep.st_norm is not None else None,
            "RoM": rep.rom,
        }
        if args.format == "jsonl":
            lines.append(json.dumps({"mu": fmt(mu), **{names[q]: fmt(vals[q]) for q in quantifiers}}))
        else:
            lines.append(",".join([fmt(mu)] + [fmt(vals[q]) for q in quantifiers]))
    if args.format == "csv":
        lines.insert(0, ",".join(["mu"] + [names[q] for q in quantifiers]))
    lines.append(_manifest(n, stabs, quantifiers, args.raw))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    total = {q: sum(r.timings.get(q, 0.0) for r in reports) for q in quantifiers}
    print("# wall " + " ".join(f"{q}={t:.3f}s" for q, t in total.items()), file=sys.stderr)
    return EXIT_OK


def _read_input_facets(args) -> list[Hyperplane]:
    source = args.facets or args.facet_lib
    if not source:
        raise UsageError("give a facet file (or '-' for stdin) or --facet-lib")
    if source == "-":
        return [Hyperplane.from_json(line) for line in sys.stdin if line.strip()]
    return read_facets(source)


def cmd_facet(args) -> int:
    if args.action == "discover":
        return _facet_discover(args)
    facets = _read_input_facets(args)
    if args.action == "orbit":
        for h in facets:
            orbit = symmetry_orbit(h, args.max_size)
            for img in sorted(orbit, key=lambda x: x.key):
                print(img.to_json())
            if orbit.truncated:
                print(f"# orbit truncated at {args.max_size}", file=sys.stderr)
        return EXIT_OK
    failures = 0
    for h in facets:
        stabs = _stabs(args, h.n_qubits)
        b, argmax = bound(h.a, stabs)
        lo = lower_bound(h.a, stabs)
        ok = int(b) == h.b
        failures += not ok
        print(json.dumps({
            "n": h.n_qubits,
            "a": {str(k): c for k, c in h.support.items()},
            "b": h.b,
            "bound": int(b),
            "lower_bound": int(lo),
            "argmax_id": int(argmax),
            "verified": ok,
        }))
    return EXIT_VERIFY if failures else EXIT_OK


def _facet_discover(args) -> int:
    if not args.state:
        raise UsageError("facet discover needs --state")
    v = parse_state(args.state).vector()
    stabs = _stabs(args, v.n_qubits)
    seed = vicinity_seed(v, stabs, args.seed_size)
    face = grow_face(seed, stabs)
    result = facet_through(face, stabs)
    print(f"# seed={list(seed.stabilizer_ids)} face size={len(face)} kind={result.kind}", file=sys.stderr)
    if result.kind != "facet":
        raise VerificationError(f"face of {len(face)} stabilizers did not fix a facet ({result.reason})")
    print(result.hyperplane.to_json())
    if args.facet_lib:
        with open(args.facet_lib, "a") as fh:
            fh.write(result.hyperplane.to_json() + "\n")
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--stab-cache", help="directory (or file) for binary stabilizer caches")
    common.add_argument("--facet-lib", help="facet library, JSON lines")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--allow-large", action="store_true", help="permit N=5 enumeration")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="magicpoly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate stabilizer states")
    p.add_argument("n", type=int, metavar="N")
    p.add_argument("--cache", help="cache file to write or validate")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("eval", parents=[common], help="magic quantifiers of one state")
    p.add_argument("state", help="state expression, e.g. ghz:N=2,phi=0.785398163")
    p.add_argument("--quantifiers", help="comma list from M,W,ST,RoM")
    p.add_argument("--search", type=int, default=0, metavar="BUDGET", help="also run the discrete M search")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="quantifiers along a Werner line")
    p.add_argument("state", help="base state expression")
    p.add_argument("--mu-start", type=float, default=0.0)
    p.add_argument("--mu-end", type=float, default=1.0)
    p.add_argument("--mu-step", type=float, default=0.01)
    p.add_argument("--quantifiers", help="comma list from M,W,ST,RoM")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--raw", action="store_true", help="print W and st_norm without plotting offsets")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("facet", parents=[common], help="verify, discover or expand facets")
    p.add_argument("action", choices=("verify", "discover", "orbit"))
    p.add_argument("facets", nargs="?", help="facet JSON lines file, '-' for stdin")
    p.add_argument("--state", help="state whose vicinity seeds discovery")
    p.add_argument("--seed-size", type=int, default=2)
    p.add_argument("--max-size", type=int, default=100000)
    p.set_defaults(func=cmd_facet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, StateParseError, InvalidStateError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PolicyError, SolverError, RowGenerationLimit, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (VerificationError, EnumerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
