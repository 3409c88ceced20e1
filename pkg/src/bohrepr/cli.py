"""Command-line entry point.

    bohrepr run spin-epr [--output r.json]
    bohrepr run weyl --dim 3 --lambda 0 --mu 0
    bohrepr run custom scenario.json
    bohrepr validate scenario.json

Exit status: 0 when every assertion passed, 1 on an assertion failure,
2 on input or schema errors. Diagnostics go to stderr; the report alone
goes to the output target.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .beables import maximality_probe
from .context import EventSpace, MeasurementContext, State, validate_event_space
from .eprbohm import build_spin_scenario, theorem1_report
from .errors import ScenarioError, VerificationError
from .linalg import DEFAULT_TOL, TolerancePolicy, self_adjoint_residual
from .report import Section, assemble, check_bound, check_true, serialize
from .symmetry import (
    closed_form_invariant_algebra,
    invariant_algebra,
    is_definable,
    uniqueness_certificate,
    unique_definable_event_space,
)
from .weyl import weyl_suite

SCHEMA_VERSIONS = ("1.0",)
KINDS = ("spin_epr", "weyl_finite", "custom_context")
DEFAULTS = {"seed": 0, "samples": 1000, "tolerance": 1e-9, "dim": 3, "lambda": 0, "mu": 0}
WEYL_TRIALS = 200

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


@dataclass
class ScenarioFile:
    schema_version: str
    kind: str
    seed: int | None = None
    samples: int | None = None
    tolerance: TolerancePolicy | None = None
    dimension: int | None = None
    state: np.ndarray | None = None
    observable: np.ndarray | None = None
    event_spaces: dict = field(default_factory=dict)
    d: int | None = None
    lam: int | None = None
    mu: int | None = None


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _complex(x, path):
    if isinstance(x, bool):
        raise ScenarioError(path, "expected a number or [re, im]")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ScenarioError(path, "expected a number or [re, im]")


def _vector(x, path, n):
    if not isinstance(x, list):
        raise ScenarioError(path, "expected a list of complex entries")
    if len(x) != n:
        raise ScenarioError(path, f"expected {n} entries, got {len(x)}")
    return np.array([_complex(v, f"{path}/{i}") for i, v in enumerate(x)], dtype=np.complex128)


def _matrix(x, path, n):
    if not isinstance(x, list):
        raise ScenarioError(path, "expected a list of rows")
    if len(x) != n:
        raise ScenarioError(path, f"expected {n} rows, got {len(x)}")
    return np.stack([_vector(row, f"{path}/{i}", n) for i, row in enumerate(x)])


def _int(doc, key, path, minimum=None):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(path, "expected an integer")
    if minimum is not None and v < minimum:
        raise ScenarioError(path, f"must be at least {minimum}, got {v}")
    return v


def _require(doc, key):
    if key not in doc:
        raise ScenarioError(f"/{key}", "missing required field")
    return doc[key]


def _tolerance(x):
    try:
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            return TolerancePolicy.from_eps_eq(float(x))
        if isinstance(x, dict):
            unknown = sorted(set(x) - {"eps_eq", "eps_eig"})
            if unknown:
                raise ScenarioError(f"/tolerance/{unknown[0]}", "unknown tolerance field")
            base = TolerancePolicy.from_eps_eq(float(x.get("eps_eq", DEFAULT_TOL.eps_eq)))
            return TolerancePolicy(base.eps_eq, float(x.get("eps_eig", base.eps_eig)))
    except (TypeError, ValueError) as exc:
        raise ScenarioError("/tolerance", str(exc)) from exc
    raise ScenarioError("/tolerance", "expected a number or {eps_eq, eps_eig}")


def parse_scenario(doc):
    """Schema and invariant checks; raises :class:`ScenarioError` at the first failing field."""
    if not isinstance(doc, dict):
        raise ScenarioError("/", "scenario must be a JSON object")
    version = _require(doc, "schema_version")
    if version not in SCHEMA_VERSIONS:
        raise ScenarioError("/schema_version", f"unrecognized schema version {version!r}")
    kind = _require(doc, "kind")
    if kind not in KINDS:
        raise ScenarioError("/kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    scn = ScenarioFile(version, kind)
    if "seed" in doc:
        scn.seed = _int(doc, "seed", "/seed", 0)
    if "samples" in doc:
        scn.samples = _int(doc, "samples", "/samples", 0)
    if "tolerance" in doc:
        scn.tolerance = _tolerance(doc["tolerance"])
    tol = scn.tolerance or DEFAULT_TOL

    if kind == "weyl_finite":
        for key in ("d", "lambda", "mu"):
            _require(doc, key)
        scn.d = _int(doc, "d", "/d", 2)
        scn.lam = _int(doc, "lambda", "/lambda")
        scn.mu = _int(doc, "mu", "/mu")
    elif kind == "custom_context":
        for key in ("dimension", "state", "observable"):
            _require(doc, key)
        n = scn.dimension = _int(doc, "dimension", "/dimension", 1)
        scn.state = _vector(doc["state"], "/state", n)
        norm = float(np.linalg.norm(scn.state))
        if abs(norm - 1) > tol.eps_eq:
            raise ScenarioError("/state", f"state norm {norm:.6g} outside tolerance {tol.eps_eq:g}")
        scn.observable = _matrix(doc["observable"], "/observable", n)
        res = self_adjoint_residual(scn.observable)
        if res > tol.eps_eq:
            raise ScenarioError("/observable", f"observable is not self-adjoint: ||H - H*|| = {res:.3e}")
        spaces = doc.get("event_spaces", {})
        if not isinstance(spaces, dict):
            raise ScenarioError("/event_spaces", "expected an object mapping names to vector lists")
        for name, members in spaces.items():
            path = f"/event_spaces/{name}"
            if not isinstance(members, list) or not members:
                raise ScenarioError(path, "expected a non-empty list of vectors")
            vecs = [_vector(v, f"{path}/{i}", n) for i, v in enumerate(members)]
            for i, v in enumerate(vecs):
                norm = float(np.linalg.norm(v))
                if abs(norm - 1) > tol.eps_eq:
                    raise ScenarioError(f"{path}/{i}", f"member norm {norm:.6g} outside tolerance {tol.eps_eq:g}")
            scn.event_spaces[name] = vecs
    return scn


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError("/", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("/", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(doc)


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------


def _resolve(args, scn, key, attr=None):
    """Explicit flag, then scenario file value, then default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if scn is not None:
        v = getattr(scn, attr or key)
        if v is not None:
            return v
    return DEFAULTS[key]


def _tol(args, scn):
    if args.tolerance is not None:
        return TolerancePolicy.from_eps_eq(args.tolerance)
    if scn is not None and scn.tolerance is not None:
        return scn.tolerance
    return TolerancePolicy.from_eps_eq(DEFAULTS["tolerance"])


def run_spin(seed, samples, tol):
    scn = build_spin_scenario(tol)
    return {"spin_epr": theorem1_report(scn, seed=seed, samples=samples)}


def run_weyl(d, lam, mu, seed, samples, tol):
    return {"weyl_finite": weyl_suite(d, lam, mu, samples=samples, trials=WEYL_TRIALS, seed=seed, tol=tol)}


def custom_section(scn, seed, samples, tol):
    """Validate the context, derive the unique definable event space and check every named space against it."""
    ctx = MeasurementContext(State(scn.state, tol), scn.observable, tol)
    out = []
    unique = unique_definable_event_space(ctx, check=False)
    rep = validate_event_space(ctx, unique)
    out.append(check_true("unique.valid", "unique definable event space passes validation", True, rep.valid,
                          "DERIVED", "appropriate event space conditions", rep.failures or None))
    cert = uniqueness_certificate(ctx, unique)
    out.append(check_true("unique.certificate", "no other rank-1 invariant projection is an appropriate atom", True,
                          cert.passed, "DERIVED", "uniqueness of the definable event space"))
    inv = invariant_algebra(ctx, check=False)
    closed = closed_form_invariant_algebra(ctx)
    dist = inv.span_distance(closed) if len(inv) == len(closed) else float("inf")
    out.append(check_bound("invariant_algebra.closed_form", "commutant of the symmetry generators equals the closed form",
                           dist, 1e-8, "DERIVED", "block structure of the invariant algebra"))
    defn = is_definable(ctx, unique, inv)
    out.append(check_true("unique.definable", "unique space is invariant under all context symmetries", True,
                          defn.definable, "DERIVED", "definability", defn.residual))
    probe = maximality_probe(ctx, unique, samples=samples, seed=seed)
    out.append(check_bound("unique.maximality_probe", f"{samples} rank-1 extensions of Def(S) break classicality",
                           len(probe.violations), 0, "DERIVED", "maximality of the beable algebra"))
    spaces = {}
    for name in sorted(scn.event_spaces):
        space = EventSpace(scn.event_spaces[name], tol)
        r = validate_event_space(ctx, space)
        entry = {"valid": r.valid, "failures": r.failures}
        if r.valid:
            d = is_definable(ctx, space, inv)
            same = space.equivalent(unique, tol)
            entry.update(definable=d.definable, equivalent_to_unique=same)
            out.append(check_true(f"event_space.{name}.definable_iff_unique",
                                  f"{name} is definable exactly when it equals the unique space", same, d.definable,
                                  "DERIVED", "uniqueness of the definable event space", d.as_dict()))
        spaces[name] = entry
    details = {
        "dimension": ctx.dim,
        "eigenvalues": list(ctx.spectral.eigenvalues),
        "ranks": list(ctx.spectral.ranks),
        "unique_event_space": [m for m in unique.members],
        "invariant_algebra_dim": len(inv),
        "event_spaces": spaces,
    }
    return {"custom_context": Section(out, details)}


def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_run(args):
    scn = None
    target = args.target
    if target == "custom":
        if not args.path:
            raise ScenarioError("/", "run custom needs a scenario file path")
        scn = load_scenario(args.path)
        target = scn.kind
    elif args.path:
        raise ScenarioError("/", f"unexpected argument {args.path!r}")
    tol = _tol(args, scn)
    seed = _resolve(args, scn, "seed")
    samples = _resolve(args, scn, "samples")
    if target in ("spin-epr", "spin_epr"):
        sections = run_spin(seed, samples, tol)
    elif target in ("weyl", "weyl_finite"):
        d = _resolve(args, scn, "dim", "d")
        if d < 2:
            raise ScenarioError("/d", f"must be at least 2, got {d}")
        sections = run_weyl(d, _resolve(args, scn, "lambda", "lam"), _resolve(args, scn, "mu"), seed, samples, tol)
    else:
        sections = custom_section(scn, seed, samples, tol)
    report = assemble(sections, seed=seed, tolerance=tol)
    _emit(serialize(report), args.output)
    for name, a in report.failures():
        print(f"FAILED {name}/{a.id}: residual {a.residual:.3e} > {a.tolerance:.3e}", file=sys.stderr)
    return report.exit_status


def cmd_validate(args):
    scn = load_scenario(args.path)
    print(f"ok: {scn.kind} scenario (schema {scn.schema_version})", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="bohrepr", description="Verify beable and EPR claims for finite quantum models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write a JSON report")
    run.add_argument("target", choices=["spin-epr", "weyl", "custom"])
    run.add_argument("path", nargs="?", help="scenario file (run custom)")
    run.add_argument("--output", "-o", help="report path (default: stdout)")
    run.add_argument("--seed", type=int, help=f"random seed (default {DEFAULTS['seed']})")
    run.add_argument("--samples", type=int, help=f"random probe count (default {DEFAULTS['samples']})")
    run.add_argument("--tolerance", type=float, help=f"eps_eq (default {DEFAULTS['tolerance']:g})")
    run.add_argument("--dim", type=int, help=f"qudit dimension for weyl (default {DEFAULTS['dim']})")
    run.add_argument("--lambda", dest="lambda", type=int, help="relative-position label for weyl (default 0)")
    run.add_argument("--mu", type=int, help="total-momentum label for weyl (default 0)")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("path")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", None) is not None and args.samples < 0:
        parser.error("--samples must be non-negative")
    if getattr(args, "tolerance", None) is not None and not args.tolerance > 0:
        parser.error("--tolerance must be positive")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
