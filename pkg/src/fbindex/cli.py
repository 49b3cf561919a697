"""Command-line front end: ``fbindex {solve,index,verify}``.

Documents are JSON (default) or CSV.  Floats are rounded to 12
significant digits and every random choice is seeded, so identical
arguments give byte-identical output.  ``wall_time_ms`` is reported as 0
unless ``--timing`` is given, for the same reason.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

from . import __version__
from . import claims as claims_mod
from . import steklov
from .errors import ConfigError, FBIndexError, SpecError
from .normal_frame import hopf_constant
from .stability import DiscretizationConfig, inequality_report, morse_index
from .surface_zoo import SurfaceSpec, conformal_factor, scale_radius, solve_boundary_parameter

SIG_DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _round(x):
    """Recursively round floats to SIG_DIGITS significant digits; NaN/inf -> None."""
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


# -- argument handling -----------------------------------------------------------

def _common(p):
    p.add_argument("--surface", choices=("catenoid", "fs", "mobius"), required=True)
    p.add_argument("--q", type=int, default=1, help="catenoid frequency")
    p.add_argument("--k", type=int, default=2, help="Fraser-Sargent k (k > l)")
    p.add_argument("--l", type=int, default=1, help="Fraser-Sargent l")
    p.add_argument("--scaling", choices=("unit", "raw"), default="unit")
    p.add_argument("--ntheta", type=int, default=None, help="highest theta-frequency")
    p.add_argument("--nt", type=int, default=None, help="Legendre modes per parity")
    p.add_argument("--quad", type=int, default=None, help="Gauss-Legendre nodes in t")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write the document here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="record real wall time in the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbindex", description="Index computations for explicit "
                     "free boundary minimal surfaces in the unit ball.")
    parser.add_argument("--version", action="version", version=f"fbindex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("solve", help="boundary parameter, scale and conformal factor"))
    p = sub.add_parser("index", help="Morse, spectral and energy indices with the inequality chain")
    _common(p)
    p.add_argument("--sweep", action="store_true", help="add a convergence table over refinements")
    p = sub.add_parser("verify", help="run the identity checks")
    _common(p)
    p.add_argument("--claim", action="append", choices=claims_mod.CLAIM_IDS,
                   help="restrict to this claim (repeatable)")
    p.add_argument("--samples", type=int, default=claims_mod.DEFAULT_SAMPLES)
    return parser


def spec_from_args(args) -> SurfaceSpec:
    if args.surface == "catenoid":
        return SurfaceSpec.catenoid(args.q, scaling=args.scaling)
    if args.surface == "fs":
        return SurfaceSpec.fraser_sargent(args.k, args.l, scaling=args.scaling)
    return SurfaceSpec.mobius(scaling=args.scaling)


def config_from_args(args) -> DiscretizationConfig:
    kw = {}
    if args.ntheta is not None:
        kw["n_theta_max"] = args.ntheta
    if args.nt is not None:
        kw["n_t"] = args.nt
        kw["quad_order"] = max(2 * args.nt, DiscretizationConfig.quad_order)
    if args.quad is not None:
        kw["quad_order"] = args.quad
    return DiscretizationConfig(**kw)


# -- documents ---------------------------------------------------------------------

def _surface_block(spec):
    bp = solve_boundary_parameter(spec)
    doc = {"surface": {**spec.as_dict(), "label": spec.label(), "dim": spec.dim},
           "boundary_parameter": {"T": bp.T, "residual": bp.residual}}
    return doc, bp


def _hopf(spec):
    h = hopf_constant(spec)
    # value is Omega.Omega = (|u_tt^perp|^2 - |u_ttheta^perp|^2) / 4
    return {"value": h.value, "utt_perp_sq_minus_uttheta_perp_sq": 4.0 * h.value,
            "max_rel_deviation": h.max_rel_deviation, "grid": h.grid}


def cmd_solve(args, spec, cfg):
    doc, bp = _surface_block(spec)
    doc["scale_radius"] = scale_radius(spec)
    doc["conformal_factor_boundary"] = float(conformal_factor(spec, bp.T))
    doc["hopf_constant"] = _hopf(spec)
    rows = [("T", bp.T), ("residual", bp.residual), ("scale_radius", doc["scale_radius"]),
            ("conformal_factor_boundary", doc["conformal_factor_boundary"]),
            ("hopf_constant", doc["hopf_constant"]["value"])]
    return 0, doc, {"solve": (("quantity", "value"), rows)}


def _steklov_block(spec, tol):
    tol = steklov.DEFAULT_TOL if tol is None else tol
    modes = steklov.steklov_spectrum(spec)
    res = steklov.spectral_index(spec, tol=tol)
    return {"modes": [{"n": m.n, "t_parity": m.t_parity, "sigma": m.sigma,
                       "multiplicity": m.multiplicity} for m in modes],
            "index": res.index, "unit_eigenvalues": res.unit_eigenvalues, "tol": res.tol}


def cmd_index(args, spec, cfg):
    doc, _ = _surface_block(spec)
    doc["hopf_constant"] = _hopf(spec)
    doc["steklov"] = _steklov_block(spec, args.tol)
    rep = morse_index(spec, cfg)
    doc["stability"] = {
        "eigenvalues": [{"value": e.value, "frequency": e.frequency, "parity": e.parity,
                         "sector": e.sector, "multiplicity": e.multiplicity} for e in rep.eigenvalues],
        "morse_index": rep.morse_index,
        "nullity_band": rep.nullity_band_count,
        "zero_band": rep.zero_band_abs,
        "converged": rep.converged,
        "levels": rep.levels,
        "sylvester": rep.sylvester,
    }
    chain = inequality_report(spec, cfg, rep)
    doc["chain"] = {"ind": chain.ind, "ind_S": chain.ind_S, "ind_E": chain.ind_E,
                    "dim_moduli": chain.dim_moduli,
                    "inequalities": [{"name": q.name, "statement": q.statement, "lhs": q.lhs,
                                      "rhs": q.rhs, "holds": q.holds} for q in chain.inequalities]}
    if args.sweep:
        sweep_cfg = DiscretizationConfig(**{**cfg.as_dict(), "refinement_levels": 3,
                                            "n_theta_quad": cfg.n_theta_quad})
        doc["sweep"] = morse_index(spec, sweep_cfg).levels
    rows = [(e.sector, e.frequency, e.parity, e.value) for e in rep.eigenvalues]
    tables = {"eigenvalues": (("sector", "frequency", "parity", "eigenvalue"), rows)}
    if args.sweep:
        tables["sweep"] = (("n_t", "n_theta_max", "morse_index", "nullity_band"),
                           [tuple(lv.values()) for lv in doc["sweep"]])
    ok = rep.converged and chain.ok
    if not rep.converged:
        doc["error"] = {"type": "NotConverged", "levels": rep.levels}
    return (0 if ok else 1), doc, tables


def cmd_verify(args, spec, cfg):
    doc, _ = _surface_block(spec)
    ids = args.claim or list(claims_mod.CLAIM_IDS)
    checks = []
    for cid in ids:
        try:
            checks.append(claims_mod.run_check(spec, cid, args.samples, args.tol, seed=args.seed))
        except claims_mod.NotApplicable:
            checks.append(claims_mod.ClaimCheck(cid, math.nan, 0, claims_mod.default_tolerance(cid),
                                                claims_mod.NA))
    doc["claims"] = [{"id": c.claim_id, "max_residual": c.max_residual, "samples": c.samples,
                      "tolerance": c.tolerance, "verdict": c.verdict} for c in checks]
    verdict = claims_mod.aggregate_verdict(checks)
    doc["verdict"] = verdict
    if "descent" in ids and any(c.claim_id == "descent" and c.applicable for c in checks):
        t, th = claims_mod.sample_points(spec, 50, args.seed)
        doc["descent_table"] = {k: {"sign": s, "residual": r}
                                for k, (s, r) in claims_mod.descent_table(spec, t, th).items()}
    rows = [(c.claim_id, c.max_residual, c.tolerance, c.verdict) for c in checks]
    return (0 if verdict == claims_mod.PASS else 1), doc, {"claims": (("claim", "residual", "tol", "verdict"), rows)}


COMMANDS = {"solve": cmd_solve, "index": cmd_index, "verify": cmd_verify}


def _csv_text(tables) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for i, (header, rows) in enumerate(tables.values()):
        if i:
            buf.write("\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return "" if not math.isfinite(v) else f"{v:.{SIG_DIGITS}g}"
    return v


def render(doc, tables, fmt) -> str:
    if fmt == "csv":
        return _csv_text(tables)
    return json.dumps(_round(doc), indent=2, sort_keys=False) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        spec = spec_from_args(args)
        cfg = config_from_args(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (SpecError, ConfigError) as exc:
        print(f"fbindex: error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        code, body, tables = COMMANDS[args.command](args, spec, cfg)
    except FBIndexError as exc:
        print(f"fbindex: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = int(round(1000 * (time.perf_counter() - start))) if args.timing else 0
    manifest = {"command": args.command, "spec": spec.as_dict(), "config": cfg.as_dict(),
                "versions": {"fbindex": __version__}, "seed": args.seed, "wall_time_ms": wall}
    doc = {"manifest": manifest, **body}
    text = render(doc, tables, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
