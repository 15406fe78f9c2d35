"""Command line front end: ``ising-lab <command> ...``.

Exit codes: 0 ok, 2 bad input, 3 size cap exceeded, 4 a check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import mpmath

from .errors import IsingLabError, fail
from .numerics import (PRECISION_ENV, DEFAULT_DIGITS, PrecisionContext, format_exact, is_exact,
                       is_inf, parse_complex, poly_eval, poly_roots, to_mpc)

OUT_DIGITS = 17


@dataclass(frozen=True)
class CliConfig:
    precision_digits: int = DEFAULT_DIGITS
    enumeration_cap: int = 24
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.precision_digits < 30:
            fail("DOMAIN", "precision must be at least 30 digits")
        if not 1 <= self.enumeration_cap <= 26:
            fail("DOMAIN", "enumeration cap must lie in [1, 26]")
        if self.output_format not in ("json", "csv"):
            fail("DOMAIN", "format must be json or csv")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.precision_digits)


def enc(x):
    """JSON encoding of a scalar: exact values as strings, others as [re, im] strings."""
    if is_inf(x):
        return "inf"
    if is_exact(x):
        return format_exact(x)
    z = to_mpc(x) if not isinstance(x, mpmath.mpc) else x
    return [mpmath.nstr(z.real, OUT_DIGITS), mpmath.nstr(z.imag, OUT_DIGITS)]


def _read_graph(path):
    from .graphs import load_graph
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        fail("PARSE_ERROR", f"line 0: cannot read {path}: {exc}")
    return load_graph(text)


def _beta(text):
    if text is None:
        return None
    try:
        return parse_complex(text)
    except IsingLabError:
        raise
    except Exception:
        fail("PARSE_ERROR", f"cannot parse complex number {text!r}")


def _need(args, name):
    if getattr(args, name) is None:
        fail("DOMAIN", f"--{name} is required")
    return getattr(args, name)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_exact(args, cfg: CliConfig):
    from .exact import interaction_matrix, ising_poly
    G, T = _read_graph(_need(args, "graph"))
    P = ising_poly(G, cfg.enumeration_cap)
    out = {"n": G.n, "m": G.m, "poly": P.to_json()}
    beta = _beta(args.beta)
    with cfg.ctx.activate():
        if beta is not None:
            out["value"] = enc(poly_eval(P, beta))
        if T is not None:
            M = interaction_matrix(G, T, cfg.enumeration_cap)
            out["interaction"] = M.to_json()
            if beta is not None:
                out["interaction_value"] = {k: enc(poly_eval(getattr(M, k), beta))
                                            for k in ("z00", "z01", "z10", "z11")}
    return out


def cmd_region_classify(args, cfg):
    from .regions import classify
    beta = _beta(_need(args, "beta"))
    return classify(complex(beta), int(_need(args, "delta"))).to_json()


def cmd_region_table(args, cfg):
    from .regions import comparison_table, table_csv
    rows = comparison_table(args.from_, args.to)
    if cfg.output_format == "csv":
        return table_csv(rows)
    return {"rows": rows}


def cmd_certify(args, cfg):
    from .saw import certify_zero_free
    G, _ = _read_graph(_need(args, "graph"))
    rep = certify_zero_free(G, complex(_beta(_need(args, "beta"))), int(_need(args, "delta")),
                            raise_on_fail=False)
    out = rep.to_json()
    out["verdict"] = "PASS" if rep.passed else "FAIL"
    if not rep.passed:
        raise _Report(out, 4)
    return out


def cmd_fptas(args, cfg):
    from .exact import ising_poly
    from .fptas import approx_log_z
    G, _ = _read_graph(_need(args, "graph"))
    beta = _beta(_need(args, "beta"))
    res = approx_log_z(G, beta, float(_need(args, "eps")), int(_need(args, "delta")), cfg.ctx,
                       cfg.enumeration_cap)
    out = {"z_hat": enc(res.z_hat), "Z_hat": enc(res.Z_hat), "m_used": res.m_used,
           "error_bound": res.error_bound, "t_ratio": res.t_ratio}
    with cfg.ctx.activate():
        exact = to_mpc(poly_eval(ising_poly(G, cfg.enumeration_cap), beta))
        out["Z_exact"] = enc(exact)
        out["observed_error"] = float(abs(res.Z_hat / exact - 1))
    return out


def cmd_gadget_implement(args, cfg):
    from .graphs import emit_graph, graph_to_json
    from .gadgets import implement_target
    beta = complex(_beta(_need(args, "beta")))
    target = complex(_beta(_need(args, "target")))
    eps = float(_need(args, "eps"))
    res = implement_target(beta, int(_need(args, "delta")), target, eps, cfg.ctx, seed=cfg.seed)
    out = res.to_json()
    out["value"] = enc(res.value)
    out["target"] = [repr(target.real), repr(target.imag)]
    if res.graph is not None:
        G, T = res.graph
        out["graph"] = graph_to_json(G, T)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(emit_graph(G))
    return out


def cmd_find_zeros(args, cfg):
    from .exact import ising_poly
    from .maps import disk_ratio
    from .regions import classify
    G, _ = _read_graph(_need(args, "graph"))
    P = ising_poly(G, cfg.enumeration_cap)
    from .graphs import max_degree
    Delta = int(args.delta) if args.delta is not None else max(3, max_degree(G))
    zeros = []
    with cfg.ctx.activate():
        roots = poly_roots(P, cfg.ctx) if P.degree >= 1 else []
        for r in sorted(roots, key=lambda z: (float(z.real), float(z.imag))):
            c = complex(r)
            cl = classify(c, Delta) if c != -1 else None
            zeros.append({"root": enc(r), "ratio": disk_ratio(c),
                          "label": cl.label if cl else "SPECIAL_EASY_POINT",
                          "flags": cl.flags if cl else []})
    return {"poly": P.to_json(), "Delta": Delta, "zeros": zeros}


def cmd_saw_tree(args, cfg):
    from .saw import build_saw_tree, tree_pinned_poly
    G, _ = _read_graph(_need(args, "graph"))
    T = build_saw_tree(G, int(args.root))
    out = T.to_json()
    out["size"] = T.size
    if args.poly:
        out["poly"] = tree_pinned_poly(T).to_json()
    return out


class _Report(Exception):
    def __init__(self, payload, code):
        super().__init__("report")
        self.payload, self.code = payload, code


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file (text 'n m' format or JSON); '-' for stdin")
    common.add_argument("--beta", help="edge interaction as RE,IM (exact rationals allowed)")
    common.add_argument("--delta", type=int, help="maximum degree Delta")
    common.add_argument("--eps", type=float)
    common.add_argument("--target", help="target weight RE,IM")
    common.add_argument("--precision", type=int, help=f"working digits (env {PRECISION_ENV})")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=24, help="enumeration cap (vertices)")

    p = argparse.ArgumentParser(prog="ising-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("exact", parents=[common], help="exact polynomial and pinned sums").set_defaults(fn=cmd_exact)
    reg = sub.add_parser("region", help="parameter-plane geometry")
    rsub = reg.add_subparsers(dest="sub", required=True)
    rsub.add_parser("classify", parents=[common]).set_defaults(fn=cmd_region_classify)
    t = rsub.add_parser("table", parents=[common])
    t.add_argument("--from", dest="from_", type=int, default=3)
    t.add_argument("--to", type=int, default=20)
    t.set_defaults(fn=cmd_region_table)
    sub.add_parser("certify", parents=[common], help="zero-freeness certificate").set_defaults(fn=cmd_certify)
    sub.add_parser("fptas", parents=[common], help="approximate Z by Taylor truncation").set_defaults(fn=cmd_fptas)
    gad = sub.add_parser("gadget", help="weight implementation")
    gsub = gad.add_subparsers(dest="sub", required=True)
    gi = gsub.add_parser("implement", parents=[common])
    gi.add_argument("--out", help="write the compiled graph here when it was compiled")
    gi.set_defaults(fn=cmd_gadget_implement)
    sub.add_parser("find-zeros", parents=[common], help="zeros of Z with labels").set_defaults(fn=cmd_find_zeros)
    st = sub.add_parser("saw-tree", parents=[common], help="self-avoiding-walk tree as JSON")
    st.add_argument("--root", type=int, default=0)
    st.add_argument("--poly", action="store_true", help="include the tree polynomial")
    st.set_defaults(fn=cmd_saw_tree)
    return p


def _emit(payload, fmt, stream):
    if isinstance(payload, str):
        stream.write(payload)
    else:
        stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


_VALUE_OPTS = ("--beta", "--target")


def _glue_negative(argv):
    """argparse reads '-1,0' as an option; glue such values to their flag."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] != "-":
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative(argv))
    try:
        digits = args.precision
        if digits is None:
            env = os.environ.get(PRECISION_ENV)
            digits = int(env) if env else DEFAULT_DIGITS
        cfg = CliConfig(digits, args.cap, args.format, args.seed)
        payload = args.fn(args, cfg)
    except _Report as rep:
        _emit(rep.payload, args.format, sys.stdout)
        return rep.code
    except IsingLabError as exc:
        sys.stderr.write(json.dumps({"error": exc.kind, "message": str(exc)}) + "\n")
        return exc.exit_code
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "PARSE_ERROR", "message": str(exc)}) + "\n")
        return 2
    _emit(payload, args.format, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
