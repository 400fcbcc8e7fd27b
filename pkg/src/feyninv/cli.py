"""Command line entry point: ``feyninv <command> ...``.

Every command writes one JSON document to stdout (or ``--output``) holding a
``manifest`` and a ``result``.  Errors print a single ``error: Kind: reason``
line to stderr and exit with 1 (internal), 2 (bad input or precondition) or
3 (numeric non-convergence).
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from feyninv import __version__
from feyninv.errors import FeynInvError, NotInSpanError, PreconditionError, SymmetryError

DEFAULTS = {
    "order": 2,
    "A_def": "e1-tanh",
    "tol": 1e-9,
    "levels": 3,
    "h0": 0.125,
    "seed": 0,
    "threads": 1,
}
_TYPES = {"order": int, "A_def": str, "tol": float, "levels": int, "h0": float, "seed": int, "threads": int}


def load_config(path) -> dict:
    """Flat ``key = value`` file; unknown keys are rejected."""
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[feyninv]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise PreconditionError(f"config {path}: {exc}".replace("\n", " ")) from None
    out = {}
    for key, raw in cp["feyninv"].items():
        if key not in _TYPES:
            raise PreconditionError(f"config {path}: unknown key {key!r}")
        try:
            out[key] = _TYPES[key](raw.strip().strip('"'))
        except ValueError:
            raise PreconditionError(f"config {path}: bad value for {key}: {raw!r}") from None
    return out


class Context:
    """Resolved settings plus the list of input files read."""

    def __init__(self, args, config: dict):
        self.args = args
        self.config = config
        self.used: dict = {}
        self.inputs: dict = {}

    def get(self, name: str):
        val = getattr(self.args, name, None)
        if val is None:
            val = self.config.get(name, DEFAULTS[name])
        self.used[name] = val
        return val

    def read(self, path) -> str:
        data = Path(path).read_bytes()
        self.inputs[str(path)] = hashlib.sha256(data).hexdigest()
        return data.decode("utf-8")

    def manifest(self) -> dict:
        cmd = [self.args.command] + ([self.args.mode] if getattr(self.args, "mode", None) else [])
        return {
            "command": " ".join(cmd),
            "inputs": dict(sorted(self.inputs.items())),
            "config": dict(sorted(self.used.items())),
            "version": __version__,
        }


# ---------------------------------------------------------------------------
# commands

def cmd_graph(ctx: Context) -> dict:
    from feyninv import graphpoly as gp

    g = gp.FeynmanGraph.from_json(ctx.read(ctx.args.path))
    mode = ctx.args.mode
    if mode == "u":
        return {"U": str(gp.symanzik_u(g))}
    if mode == "f":
        F = gp.symanzik_f(g)
        return {"F": str(F), "ring": list(F.ring)}
    if mode == "auto":
        grp = gp.line_symmetry_group(g)
        return {"order": grp.order, "generators": grp.generators_cycle_notation()}
    pi = gp.parametric_integral(g, ctx.args.D)
    return {
        "U": str(pi.U),
        "F": str(pi.F),
        "lines": pi.n,
        "loops": pi.loops,
        "D": str(pi.D),
        "exponents": pi.exponents(),
    }


def _load_group(ctx: Context):
    from feyninv.invariant import d4_group, parse_group

    spec = ctx.args.group
    if spec == "d4":
        return d4_group()
    return parse_group(ctx.read(spec))


def _character(ctx: Context):
    c = ctx.args.character
    return None if c in (None, "trivial") else c


def _read_poly(ctx: Context, path, ring=None):
    from feyninv.polyring import parse_polynomial_file

    return parse_polynomial_file(ctx.read(path), ring)


def _read_poly_list(ctx: Context, path, ring) -> list:
    from feyninv.polyring import parse_polynomial

    out = []
    for line in ctx.read(path).splitlines():
        s = line.split("#", 1)[0].strip()
        if s and not s.startswith("vars:"):
            out.append(parse_polynomial(s, ring))
    return out


def cmd_invariant(ctx: Context) -> dict:
    from feyninv import invariant as inv

    mode = ctx.args.mode
    if mode == "basis":
        G = _load_group(ctx)
        basis = inv.invariant_space(G, ctx.args.degree, _character(ctx))
        return {
            "degree": ctx.args.degree,
            "character": ctx.args.character or "trivial",
            "dimension": len(basis),
            "basis": [str(p) for p in basis],
        }
    if mode == "molien":
        G = _load_group(ctx)
        ch = _character(ctx)
        series = inv.molien_series(G, ctx.args.through, ch)
        table = []
        for d, m in enumerate(series):
            row = {"degree": d, "molien": str(m)}
            if ctx.args.check:
                row["dimension"] = len(inv.invariant_space(G, d, ch))
            table.append(row)
        return {"group_order": G.order, "character": ctx.args.character or "trivial", "table": table}
    return _rewrite(ctx)


def _rewrite(ctx: Context) -> dict:
    from feyninv import invariant as inv

    if ctx.args.p is None:
        raise PreconditionError("rewrite needs --p <polynomial file>")
    if ctx.args.group == "d4":
        p = _read_poly(ctx, ctx.args.p, inv.D4_RING)
        G = inv.d4_group()
        if ctx.args.character:
            character = ctx.args.character
        elif inv.is_semi_invariant(G, p):
            character = "trivial"
        elif inv.is_semi_invariant(G, p, "sign"):
            character = "sign"
        else:
            raise NotInSpanError("not in module span: input is neither invariant nor sign semi-invariant")
        prim, sec = inv.d4_hironaka_data(character)
        names = ("a", "v", "wt2", "h")
        try:
            dec = inv.hironaka_rewrite(p, prim, sec, character=None if character == "trivial" else character,
                                       group=G, y_names=names)
        except SymmetryError as exc:
            raise NotInSpanError(f"not in module span: {exc}") from None
        exp = inv.wtilde_expand(p)
        return {
            "character": character,
            "primaries": ["a", "v", "wtilde^2", "h"],
            "decomposition": dec.to_json(),
            "wtilde_expansion": str(exp.as_polynomial()),
            "term_count": {"input": len(p), "decomposition": dec.term_count(), "wtilde_expansion": exp.term_count()},
        }
    if ctx.args.primaries is None:
        raise PreconditionError("rewrite for a custom group needs --primaries")
    G = _load_group(ctx)
    p = _read_poly(ctx, ctx.args.p, G.ring)
    prim = _read_poly_list(ctx, ctx.args.primaries, G.ring)
    sec = _read_poly_list(ctx, ctx.args.secondaries, G.ring) if ctx.args.secondaries else None
    try:
        dec = inv.hironaka_rewrite(p, prim, sec, character=_character(ctx), group=G)
    except SymmetryError as exc:
        raise NotInSpanError(f"not in module span: {exc}") from None
    return {"decomposition": dec.to_json(), "term_count": {"input": len(p), "decomposition": dec.term_count()}}


def cmd_reduce(ctx: Context) -> dict:
    from feyninv import ibp
    from feyninv.invariant import D4_RING

    beta = _read_poly(ctx, ctx.args.beta, D4_RING)
    theta = ibp.antiderivative(beta)
    red = ibp.boundary_reduce(theta, symmetric=not ctx.args.general)
    out = {
        "theta": str(theta),
        "reduced": {"integrand": str(red.theta_restricted), "ring": list(ibp.FACE_RING),
                    "multiplicity": str(red.multiplicity)},
    }
    if ctx.args.moment:
        out["moment"] = str(red.moment())
        out["moment_direct"] = str(ibp.moment_integral(beta, 4))
    return out


def _beta_stats(coef) -> dict:
    raw = coef.raw_term_count()
    red = coef.invariant_term_count()
    return {"raw_terms": raw, "invariant_terms": red, "ratio": raw / red if red else None}


def cmd_series(ctx: Context) -> dict:
    from feyninv.seriesengine import build_integrand

    order = ctx.get("order")
    A_def = ctx.get("A_def")
    if A_def.startswith("file:"):
        ctx.read(A_def[5:])
    rows = []
    for n, c in build_integrand(order, A_def):
        row = c.to_json()
        row["stats"] = _beta_stats(c)
        rows.append(row)
    return {"A_def": A_def, "coefficients": rows}


def cmd_ehl2d(ctx: Context) -> dict:
    from feyninv import ehl

    kappa = ctx.args.kappa
    n = ctx.args.n
    if ctx.args.loop == 1:
        closed = ehl.ehl_2d_1loop(kappa)
        terms = ehl.series_terms_1loop(kappa, ctx.args.nmax)
        coeffs = [str(ehl.c1_2d(k)) for k in range(1, n + 1)]
    else:
        closed = ehl.ehl_2d_2loop_field(kappa)
        terms = ehl.series_terms_2loop(kappa, ctx.args.nmax)
        coeffs = [str(ehl.c2_2d(k)) for k in range(1, n + 1)]
    value, idx = ehl.optimal_truncation(terms)
    value /= math.pi
    return {
        "loop": ctx.args.loop,
        "kappa": kappa,
        "closed_form": closed,
        "series_optimal": value,
        "truncation_index": idx,
        "coefficients": coeffs,
    }


def cmd_ehl4d(ctx: Context) -> dict:
    from feyninv.ehl import ehl_4d_1loop_coeffs

    return {"k": ctx.args.k, "l": ctx.args.l, "coefficient_times_pi2": str(ehl_4d_1loop_coeffs(ctx.args.k, ctx.args.l))}


def cmd_schwinger(ctx: Context) -> dict:
    from feyninv.ehl import schwinger_im

    s = schwinger_im(ctx.args.beta, ctx.args.kmax)
    return {"beta": ctx.args.beta, "value": s.value, "tail_bound": s.tail_bound, "terms": list(s.terms)}


def _gamma_b(ctx: Context, n: int, identify: bool = False) -> dict:
    from feyninv.ehl import gamma_b

    A_def = ctx.get("A_def")
    res = gamma_b(n, A_def, tol=ctx.get("tol"), normalize=not getattr(ctx.args, "raw_only", False),
                  identify=identify, h0=ctx.get("h0"), max_levels=ctx.get("levels"), threads=ctx.get("threads"))
    return res.as_dict()


def cmd_gammab(ctx: Context) -> dict:
    if ctx.args.n < 0:
        raise PreconditionError("n must be non-negative")
    if ctx.args.order is not None and ctx.args.order < 2 * ctx.args.n:
        raise PreconditionError(f"order {ctx.args.order} is below 2n = {2 * ctx.args.n}")
    return _gamma_b(ctx, ctx.args.n, ctx.args.identify)


def _theta_piece(r):
    """theta for a piece whose denominator is a power of a, else None."""
    from feyninv import ibp
    from feyninv.invariant import d4_basis

    a = d4_basis().a
    if any(f != a for f, _ in r.factors):
        return None
    theta = ibp.antiderivative(r.num)
    red = ibp.boundary_reduce(theta, symmetric=ibp.is_boundary_symmetric(theta))
    den = "".join(f"*a^{k}" if k > 1 else "*a" for _, k in r.factors)[1:] or "1"
    return {
        "theta_numerator": str(theta),
        "denominator": den,
        "reduced": {"integrand": str(red.theta_restricted), "multiplicity": str(red.multiplicity)},
    }


def cmd_pipeline(ctx: Context) -> dict:
    from feyninv.seriesengine import build_integrand

    n = ctx.args.n
    order = ctx.get("order")
    A_def = ctx.get("A_def")
    if n < 0:
        raise PreconditionError("n must be non-negative")
    if order < 2 * n:
        raise PreconditionError(f"order {order} is below 2n = {2 * n}")
    coef = dict(build_integrand(2 * n, A_def))[2 * n]
    pieces = []
    for name, r in coef.pieces():
        th = _theta_piece(r)
        pieces.append({
            "piece": name,
            "expression": r.to_text(),
            "theta": th,
            "route": "boundary" if th else "radial quadrature",
        })
    out = {"n": n, "order": order, "A_def": A_def, "beta": {"degrees": list(coef.degrees()), "u0": coef.u0.to_text(),
                                                              "stats": _beta_stats(coef), "pieces": pieces}}
    if not ctx.args.skip_quadrature:
        out["gamma_b"] = _gamma_b(ctx, n)
    return out


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="feyninv", description="Graph polynomials, invariant rewriting and weak-field coefficients.")
    ap.add_argument("--version", action="version", version=f"feyninv {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="also print a human-readable summary to stderr")
    common.add_argument("--config", help="key=value defaults file")
    common.add_argument("--threads", type=int, help="worker threads for quadrature (default 1)")
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", parents=[common], help="Symanzik polynomials, symmetry group, parametric exponents")
    p.add_argument("mode", choices=["u", "f", "auto", "integral"])
    p.add_argument("path")
    p.add_argument("--D", default="D", help="space-time dimension, symbolic 'D' or a rational")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("invariant", parents=[common], help="invariant bases, Molien series, Hironaka rewriting")
    p.add_argument("mode", choices=["basis", "molien", "rewrite"])
    p.add_argument("--group", default="d4", help="'d4' or a generator file")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--through", type=int, default=6)
    p.add_argument("--character", help="'trivial' or a character name from the group")
    p.add_argument("--check", action="store_true", help="molien: add linear-algebra dimensions")
    p.add_argument("--p", help="rewrite: polynomial file")
    p.add_argument("--primaries", help="rewrite: one primary invariant per line (custom groups)")
    p.add_argument("--secondaries", help="rewrite: one secondary invariant per line (custom groups)")
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("reduce", parents=[common], help="antiderivative in wtilde and boundary reduction")
    p.add_argument("--beta", required=True, help="D4-invariant polynomial file")
    p.add_argument("--general", action="store_true", help="use the signed four-face sum")
    p.add_argument("--moment", action="store_true", help="evaluate the exact exp(-a) moment")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("series", parents=[common], help="exact rho-expansion coefficients of the integrand")
    p.add_argument("--order", type=int)
    p.add_argument("--A-def", dest="A_def")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("ehl2d", parents=[common], help="2D Euler-Heisenberg closed forms and weak-field series")
    p.add_argument("--loop", type=int, choices=[1, 2], default=1)
    p.add_argument("--kappa", type=float, default=50.0)
    p.add_argument("--n", type=int, default=5, help="number of expansion coefficients to list")
    p.add_argument("--nmax", type=int, default=400, help="series terms considered for optimal truncation")
    p.set_defaults(func=cmd_ehl2d)

    p = sub.add_parser("ehl4d", parents=[common], help="4D one-loop weak-field coefficient")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.set_defaults(func=cmd_ehl4d)

    p = sub.add_parser("schwinger", parents=[common], help="one-loop pair-creation rate series")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--kmax", type=int, default=50)
    p.set_defaults(func=cmd_schwinger)

    p = sub.add_parser("gammaB", parents=[common], help="three-loop diagram-B coefficient by quadrature")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--order", type=int, help="expansion order; must be at least 2n")
    p.add_argument("--tol", type=float)
    p.add_argument("--levels", type=int)
    p.add_argument("--h0", type=float)
    p.add_argument("--A-def", dest="A_def")
    p.add_argument("--identify", action="store_true", help="PSLQ in the basis (1, zeta(3))")
    p.add_argument("--raw-only", action="store_true", help="skip the n = 0 normalisation fit")
    p.set_defaults(func=cmd_gammab)

    p = sub.add_parser("pipeline", parents=[common], help="end to end row for one diagram-B coefficient")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--order", type=int)
    p.add_argument("--A-def", dest="A_def")
    p.add_argument("--tol", type=float)
    p.add_argument("--levels", type=int)
    p.add_argument("--h0", type=float)
    p.add_argument("--skip-quadrature", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return ap


def _pretty(result: dict, stream) -> None:
    for key in sorted(result):
        val = result[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
            if len(val) > 100:
                val = val[:97] + "..."
        print(f"{key:>20}  {val}", file=stream)


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        ctx = Context(args, load_config(args.config))
        if args.config:
            ctx.read(args.config)
        ctx.get("threads")
        result = args.func(ctx)
        doc = {"manifest": ctx.manifest(), "result": result}
        text = json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"
    except FeynInvError as exc:
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: InputError: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: InternalError: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.pretty:
        _pretty(result, sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
