"""Command-line front end.

Exit codes: 0 ok, 1 invariant failure, 2 configuration error, 3 internal
formula mismatch. Every report starts with the resolved configuration and
the tool version so identical inputs give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from . import counting as C
from . import extremal as ex
from . import family as fam
from . import hitting as hit
from . import spread as spr
from .errors import InternalMismatch, PermDivError
from .perm import parse_partial
from .suites import SUITES

ENUMERATION_MAX_N = 7


class ConfigError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``4``, ``4..7`` or ``4,6,9``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc


def parse_count(text: str) -> int:
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"bad count {text!r}") from exc
    if not value.is_integer() or value < 0:
        raise ConfigError(f"count must be a non-negative integer, got {text!r}")
    return int(value)


def _threads(args) -> int:
    env = os.environ.get("PERMDIV_THREADS")
    cap = int(env) if env and env.isdigit() else (os.cpu_count() or 1)
    asked = args.threads or cap
    return max(1, min(asked, cap))


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    cfg["threads"] = _threads(args)
    return cfg


# -- output ------------------------------------------------------------------

def emit(args, rows: list[dict], summary: dict | None = None) -> None:
    config = _config(args)
    out = sys.stdout
    if args.json:
        doc = {"tool": "permdiv", "version": __version__, "config": config, "rows": rows}
        if summary is not None:
            doc["summary"] = summary
        out.write(json.dumps(doc, default=str) + "\n")
        return
    out.write(f"# permdiv {__version__}\n")
    out.write(f"# config {json.dumps(config, default=str, sort_keys=True)}\n")
    if rows:
        cols = list(rows[0])
        out.write("\t".join(cols) + "\n")
        for row in rows:
            out.write("\t".join(_cell(row.get(c)) for c in cols) + "\n")
    for key, value in (summary or {}).items():
        out.write(f"# {key}\t{_cell(value)}\n")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, Fraction):
        return spr.fmt_fraction(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, default=str)
    return str(v)


# -- commands ----------------------------------------------------------------

def cmd_count(args) -> int:
    ns = parse_range(args.n)
    rows = []
    mismatch = False
    for n in ns:
        if n < 4 and (args.k or args.all_k):
            raise ConfigError(f"n={n} has no k in [2, n-2]")
        ks = list(range(2, n - 1)) if args.all_k or not args.k else parse_range(args.k)
        for k in ks:
            if not 2 <= k <= n - 2:
                raise ConfigError(f"k={k} outside [2, n-2] for n={n}")
        enum = n <= ENUMERATION_MAX_N
        rows.append(_row(n, None, "d_n", C.derangement_number(n),
                         len(fam.derangements(n)) if enum else None))
        if n >= 3:
            rows.append(_row(n, None, "U_n", C.menage_number(n),
                             C.permanent01(C.menage_matrix(n)) if n <= 12 else None,
                             provenance="formula|permanent"))
        for k in ks:
            eq2 = C.size_N_H_binomial(n, k)
            eq6 = C.size_N_H_inclusion_exclusion(n, k)
            if eq2 != eq6:
                mismatch = True
            H = fam.build_H(n, k) if enum else None
            N = fam.neighborhood_N(n, H) if enum else None
            rows.append(_row(n, k, "H_k", C.size_H(k), len(H) if enum else None))
            rows.append(_row(n, k, "N_H_eq2", eq2, len(N) if enum else None))
            rows.append(_row(n, k, "N_H_eq6", eq6, len(N) if enum else None))
            rows.append(_row(n, k, "E_k", eq2 + C.size_H(k), len(H) + len(N) if enum else None))
            for which in (1, 2):
                est = C.asymptotic_estimate(n, k, which)
                rows.append({
                    "n": n, "k": k, "quantity": f"N_H_estimate_eq{'4' if which == 1 else '5'}",
                    "formula_value": _mp(est.estimate), "enumeration_value": est.exact,
                    "match": None, "provenance": "asymptotic",
                    "detail": f"relative_error={_mp(est.relative_error, 6)}",
                })
    emit(args, rows, {"formula_mismatch": mismatch})
    if mismatch or any(r["match"] is False for r in rows):
        return 3
    return 0


def _mp(x, digits: int = 25) -> str:
    import mpmath

    return mpmath.nstr(x, digits)


def _row(n, k, quantity, formula, enumerated, provenance="formula|enumeration"):
    return {
        "n": n, "k": k, "quantity": quantity, "formula_value": formula,
        "enumeration_value": enumerated,
        "match": None if enumerated is None else formula == enumerated,
        "provenance": provenance if enumerated is not None else "formula", "detail": None,
    }


def cmd_construct(args) -> int:
    F = fam.parse_family(args.family)
    if args.out:
        if args.format == "ranks":
            with open(args.out, "wb") as fh:
                fh.write(fam.dumps_ranks(F))
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(fam.dumps_text(F))
    st = fam.stats(F)
    if args.json:
        emit(args, [{"rank": int(r), "perm": " ".join(map(str, p.map))} for r, p in zip(F.ranks(), F)],
             {"size": st.size, "max_degree": st.max_degree, "diversity": st.diversity,
              "max_degree_point": str(st.max_degree_point),
              "common_intersection": str(st.common_intersection),
              "intersecting": fam.is_intersecting(F)})
    else:
        sys.stdout.write(fam.dumps_text(F))
    return 0


def cmd_verify(args) -> int:
    names = [args.module] if args.module else list(SUITES)
    rows = []
    failed = []
    for name in names:
        for check in SUITES[name](args.cap, t=args.t, seed=args.seed, fault=args.inject_fault):
            rows.append({"suite": check.suite, "check": check.name, "status": "pass" if check.ok else "FAIL",
                         "detail": check.detail if not check.ok else ""})
            if not check.ok:
                failed.append(check)
    summary = {"checks": len(rows), "failed": len(failed)}
    if failed:
        summary["counterexample"] = f"{failed[0].name}: {failed[0].detail}"
    emit(args, rows, summary)
    return 1 if failed else 0


def cmd_hitting(args) -> int:
    if args.fragments:
        t = args.t
        if t is None:
            raise ConfigError("--t is required with --fragments")
        n = t
        members = [tuple(parse_partial(chunk, n)) for chunk in args.fragments.split(";")]
    else:
        F = fam.parse_family(args.family)
        members, t = hit.diversity_fragments(F, args.t)
    max_size = args.max_size if args.max_size is not None else max(1, t - 1)
    rep = hit.minimal_hitting_sets(members, max_size=max_size, t=t)
    if args.json:
        doc = json.loads(rep.to_json())
        doc.update({"tool": "permdiv", "version": __version__, "config": _config(args)})
        sys.stdout.write(json.dumps(doc) + "\n")
        return 0
    counts = rep.counts()
    rows = [{"size": i, "count": counts.get(i, 0), "bound": rep.bound_by_size.get(i),
             "within_bound": counts.get(i, 0) <= rep.bound_by_size.get(i, math.inf)}
            for i in range(1, max_size + 1)]
    emit(args, rows, {"t": t, "members": len(members), "empty_member": rep.has_empty_member,
                      "sets": [[str(p) for p in s] for s in rep.all_sets()]})
    return 0


def cmd_spread_decompose(args) -> int:
    tau = spr.parse_fraction(args.tau)
    if tau <= 1:
        raise ConfigError("tau must exceed 1")
    if args.q < 0:
        raise ConfigError("q must be non-negative")
    F = fam.parse_family(args.family)
    if args.ambient == "star":
        A = spr.AmbientSpace.sigma(F.n, [(1, 1)])
    else:
        A = spr.AmbientSpace.sigma(F.n)
    dec = spr.spread_approximate(F, A, tau, args.q)
    verdicts = spr.verify_decomposition(F, dec)
    doc = json.loads(dec.to_json())
    if args.json:
        doc.update({"tool": "permdiv", "version": __version__, "config": _config(args)})
        sys.stdout.write(json.dumps(doc) + "\n")
    else:
        rows = [{"j": j, "S": ",".join(str(p) for p in s), "size": len(part)}
                for j, (s, part) in enumerate(dec.covers)]
        emit(args, rows, {"residual_size": doc["residual_size"], "residual_bound": doc["residual_bound"],
                          **verdicts})
    return 0 if all(verdicts.values()) else 1


def cmd_spread_mc(args) -> int:
    if args.preset == "singletons":
        if args.m is None or args.delta is None:
            raise ConfigError("--m and --delta are required")
        _check_prob(args)
        rep = spr.singleton_preset(args.g, args.m, args.delta, args.trials, args.seed, args.mode, args.clamp)
    else:
        F = fam.parse_family(args.preset)
        m = args.m if args.m is not None else math.log2(2 * F.n)
        delta = args.delta if args.delta is not None else 1 / (2 * math.log2(2 * F.n))
        args.m, args.delta = m, delta
        _check_prob(args)
        ground = [p for p in _grid(F.n)]
        r = spr.best_rational_spread(F)
        rep = spr.spread_lemma_trial(F, ground, r, m, delta, args.trials, args.seed, args.mode, args.clamp)
    kinds = {"empirical": "monte-carlo", "standard_error": "monte-carlo", "closed_form": "closed-form",
             "bound": "formula", "raw_bound": "formula"}
    rows = [{"quantity": key, "value": value, "provenance": kinds.get(key, "config")}
            for key, value in rep.as_dict().items()]
    emit(args, rows)
    ok = rep.within_bound is not False and rep.within_closed_form is not False
    return 0 if ok else 1


def _check_prob(args) -> None:
    p = args.m * args.delta if args.mode == "independent" else 1 - (1 - args.delta) ** args.m
    if not 0 < args.delta or p > 1 and not args.clamp:
        raise ConfigError(f"inclusion probability {p} outside (0, 1]; pass --clamp to cap it")


def _grid(n):
    from .perm import Point

    return [Point(r, c) for r in range(1, n + 1) for c in range(1, n + 1)]


def cmd_search(args) -> int:
    if not 1 <= args.n <= ex.SEARCH_MAX_N:
        raise ConfigError(f"exact search supports n <= {ex.SEARCH_MAX_N}")
    rep = ex.frontier(args.n, budget=args.budget)
    rows = [{"min_diversity": r.min_diversity, "max_family_size": r.max_family_size,
             "witness_diversity": r.witness_diversity, "isomorphic_to_E_k": r.isomorphic_to_E_k,
             "exact": r.exact, "nodes": r.nodes, "provenance": "enumeration"} for r in rep.frontier]
    emit(args, rows, {"ekr_max": rep.ekr_max, "max_diversity": rep.max_diversity,
                      "diversity_upper_bound": rep.diversity_upper_bound})
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of TSV")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (also PERMDIV_THREADS); work is sequential and deterministic")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="permdiv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"permdiv {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", parents=[common], help="closed-form counts vs enumeration")
    c.add_argument("--n", required=True)
    c.add_argument("--k")
    c.add_argument("--all-k", action="store_true")
    c.set_defaults(func=cmd_count)

    c = sub.add_parser("construct", parents=[common], help="build and serialise a family")
    c.add_argument("--family", required=True)
    c.add_argument("--out")
    c.add_argument("--format", choices=("text", "ranks"), default="text")
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("verify", parents=[common], help="run invariant suites")
    c.add_argument("--cap", type=int, default=6)
    c.add_argument("--module", choices=sorted(SUITES))
    c.add_argument("--t", type=int, default=5)
    c.add_argument("--inject-fault", action="store_true", help="flip one family bit (test hook)")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("hitting", parents=[common], help="minimal hitting sets")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--family")
    g.add_argument("--fragments", help="';'-separated partial permutations, e.g. '2->3,3->2;2->2'")
    c.add_argument("--t", type=int)
    c.add_argument("--max-size", type=int)
    c.set_defaults(func=cmd_hitting)

    c = sub.add_parser("spread", help="spread approximation tools")
    ssub = c.add_subparsers(dest="spread_command", required=True)
    d = ssub.add_parser("decompose", parents=[common])
    d.add_argument("--family", required=True)
    d.add_argument("--tau", required=True)
    d.add_argument("--q", type=int, required=True)
    d.add_argument("--ambient", choices=("sigma", "star"), default="sigma")
    d.set_defaults(func=cmd_spread_decompose)
    m = ssub.add_parser("mc", parents=[common])
    m.add_argument("--preset", default="singletons", help="'singletons' or a family literal")
    m.add_argument("--g", type=int, default=64)
    m.add_argument("--m", type=float)
    m.add_argument("--delta", type=float)
    m.add_argument("--trials", type=parse_count, default=20000)
    m.add_argument("--mode", choices=("independent", "union"), default="independent")
    m.add_argument("--clamp", action="store_true")
    m.set_defaults(func=cmd_spread_mc)

    c = sub.add_parser("search", parents=[common], help="extremal frontier by clique search")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--budget", type=parse_count, default=ex.DEFAULT_BUDGET)
    c.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"permdiv: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InternalMismatch as exc:
        print(f"permdiv: internal mismatch: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, PermDivError, OSError) as exc:
        print(f"permdiv: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
