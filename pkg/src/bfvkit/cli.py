"""Command-line pipeline: load a run description, execute its stages,
emit a report.

Stages run in the listed order and a failure marks every stage that
consumes the failed stage's data as skipped.  All randomness flows from
the single seed, so a run is reproducible end to end; the structured
report is byte-deterministic unless timings are requested.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 the run
description does not parse or resolve, 3 unexpected internal error.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from .bfv import build_bfv, h0_truncated, invariant_oracle, validate_structure
from .dbfv import build_double
from .phase import check_cme, check_nilpotent
from .quant import shift_check
from .registry import get_system
from .reports import (ReportRow, RunReport, emit_report, fmt_residual,
                      render_table)
from .specfile import STAGE_DEPS, RunSpec, SpecError, load_spec

__all__ = ["run", "main"]


def _model_factory(name: str):
    from .gravity.dga import torus_fourier, torus_h
    if name == "torus_h":
        return torus_h()
    if name.startswith("torus_fourier(") and name.endswith(")"):
        arg = name[len("torus_fourier("):-1].strip()
        if arg.lstrip("-").isdigit() and int(arg) >= 1:
            return torus_fourier(int(arg))
    raise SpecError([(1, 1, "unknown model %r; use torus_h or torus_fourier(cap)"
                      % name)])


def _copy_rows(rep: RunReport, stage: str, checks, ms: float = 0.0):
    for c in checks:
        residual = c.detail if (not c.ok and c.detail) else fmt_residual(c.residual)
        rep.add("%s.%s" % (stage, c.name), "%s.%s" % (stage, c.name),
                c.ok, residual, ms)


def _stage_validate(rep: RunReport, ctx: dict):
    t0 = time.monotonic()
    report = validate_structure(ctx["system"])
    _copy_rows(rep, "validate", report.checks,
               (time.monotonic() - t0) * 1e3 / max(1, len(report.checks)))
    return report.ok


def _stage_bfv(rep: RunReport, ctx: dict):
    t0 = time.monotonic()
    data = build_bfv(ctx["system"], verify=False)
    ctx["bfv"] = data
    cme = check_cme(data.s, data.chart)
    ms = (time.monotonic() - t0) * 1e3
    rep.add("bfv.master-equation", "bfv.master-equation", cme.is_zero(),
            "0" if cme.is_zero() else cme.to_text()[:200], ms)
    t0 = time.monotonic()
    bad = check_nilpotent(data.q)
    if bad:
        name, poly = next(iter(bad.items()))
        witness = "%s: %s" % (name, poly.to_text()[:160])
    else:
        witness = ""
    rep.add("bfv.charge-nilpotent", "bfv.charge-nilpotent", not bad,
            "0" if not bad else witness, (time.monotonic() - t0) * 1e3)
    return cme.is_zero() and not bad


def _stage_double(rep: RunReport, ctx: dict):
    t0 = time.monotonic()
    dbl = build_double(ctx["bfv"])
    ctx["dbl"] = dbl
    report = dbl.verify()
    _copy_rows(rep, "double", report.checks,
               (time.monotonic() - t0) * 1e3 / max(1, len(report.checks)))
    return report.ok


def _stage_cohomology(rep: RunReport, ctx: dict):
    spec = ctx["spec"]
    ok_all = True
    for d in range(2, max(2, spec.max_degree) + 1):
        t0 = time.monotonic()
        got, _meta = h0_truncated(ctx["bfv"], d)
        want = invariant_oracle(ctx["system"], d)
        ok = got == want
        ok_all = ok_all and ok
        rep.add("cohomology.h0-window-%d" % d, "cohomology.h0-window-%d" % d,
                ok, "0" if ok else "dim %d, oracle %d" % (got, want),
                (time.monotonic() - t0) * 1e3)
    return ok_all


def _stage_quantize(rep: RunReport, ctx: dict):
    from .gravity.theory import quantum_layer
    spec = ctx["spec"]
    t0 = time.monotonic()
    pol, om, ot = quantum_layer(ctx["dbl"])
    build_ms = (time.monotonic() - t0) * 1e3
    ok_all = True
    for name, r in (("omega-squared", om.commutator(om)),
                    ("residual-commutator", om.commutator(ot)),
                    ("residual-squared", ot.commutator(ot))):
        ok = r.is_zero()
        ok_all = ok_all and ok
        rep.add("quantize.%s" % name, "quantize.%s" % name, ok,
                "0" if ok else r.to_text()[:200], build_ms)
        build_ms = 0.0
    t0 = time.monotonic()
    shifts = shift_check(om, ot, count=5, seed=spec.seed)
    _copy_rows(rep, "quantize", shifts.checks, (time.monotonic() - t0) * 1e3 / 5)
    return ok_all and shifts.ok


def _gravity_samples(spec: RunSpec, rng, count: int):
    """Nondegenerate frame points: from the spec table when given,
    otherwise seeded; degenerate draws are skipped deterministically."""
    import numpy as np
    from .gravity.points import FramePoint
    if spec.table is not None:
        return [FramePoint.unpack(np.asarray(row)) for row in spec.table]
    out = []
    attempts = 0
    while len(out) < count and attempts < 20 * count:
        attempts += 1
        pt = FramePoint.random(rng)
        m = pt.b[:, 1:]
        if abs(np.linalg.det(m)) < 1e-3:
            continue
        out.append(pt)
    return out


def _stage_gravity(rep: RunReport, ctx: dict):
    import numpy as np
    from .gravity.frames import (constraint_flow_invariance, normalize_frame,
                                 random_euclidean_gauge, residual_bridge,
                                 reduced_structure_check)
    from .gravity.points import bf_to_eh, torsion
    from .gravity.dga import validate_dga
    from .gravity.theory import (build_bf_theory, double_layer,
                                 double_layer_report, first_layer,
                                 first_layer_report, structure_report)

    spec = ctx["spec"]
    model = _model_factory(spec.model or "torus_h")
    ok_all = True

    t0 = time.monotonic()
    dga = validate_dga(model)
    _copy_rows(rep, "gravity", dga.checks,
               (time.monotonic() - t0) * 1e3 / max(1, len(dga.checks)))
    ok_all = ok_all and dga.ok

    t0 = time.monotonic()
    th = build_bf_theory(model)
    base = structure_report(th)
    data = first_layer(th)
    first = first_layer_report(th, data)
    dbl = double_layer(data)
    second = double_layer_report(th, dbl)
    ms = (time.monotonic() - t0) * 1e3
    for report in (base, first, second):
        _copy_rows(rep, "gravity", report.checks,
                   ms / max(1, len(base.checks) + len(first.checks)
                            + len(second.checks)))
        ok_all = ok_all and report.ok

    rng = np.random.default_rng(spec.seed)

    t0 = time.monotonic()
    pts = _gravity_samples(spec, rng, spec.flow_samples)
    worst_zero = 0.0
    worst_tors = 0.0
    normalized = []
    for pt in pts:
        npt, _log = normalize_frame(pt)
        normalized.append(npt)
        worst_zero = max(worst_zero, abs(npt.b[0, 0]), abs(npt.b[1, 0]),
                         abs(npt.b[1, 1]))
        worst_tors = max(worst_tors, float(np.max(np.abs(torsion(npt)))))
    ms = (time.monotonic() - t0) * 1e3
    ok = worst_zero < 1e-10 and len(pts) > 0
    ok_all = ok_all and ok
    rep.add("gravity.normalize-zeroes", "gravity.normalize-zeroes", ok,
            fmt_residual(worst_zero), ms)
    ok = worst_tors < 1e-10
    ok_all = ok_all and ok
    rep.add("gravity.normalize-constraint", "gravity.normalize-constraint",
            ok, fmt_residual(worst_tors), 0.0)

    t0 = time.monotonic()
    worst = 0.0
    for pt in pts[:10]:
        npt, _ = normalize_frame(pt)
        moved, _ = normalize_frame(random_euclidean_gauge(pt, rng))
        worst = max(worst, bf_to_eh(moved).deviation(bf_to_eh(npt)))
    ok = worst < 1e-8
    ok_all = ok_all and ok
    rep.add("gravity.quotient-invariance", "gravity.quotient-invariance", ok,
            fmt_residual(worst), (time.monotonic() - t0) * 1e3)

    t0 = time.monotonic()
    drho = np.array([[0.3, 0.0, 0.0], [-0.2, 0.0, 0.0]])
    drift = constraint_flow_invariance(normalized[0], np.array([0.7, 0.0, 0.0]),
                                       drho=drho, steps=spec.steps)
    ok = drift["max_drift"] < 1e-6
    ok_all = ok_all and ok
    rep.add("gravity.flow-drift", "gravity.flow-drift", ok,
            fmt_residual(drift["max_drift"]), (time.monotonic() - t0) * 1e3)

    t0 = time.monotonic()
    bridge = residual_bridge()
    worst_pair = 0.0
    worst_act = 0.0
    for npt in normalized[:spec.samples]:
        checks = reduced_structure_check(npt, bridge=bridge)
        worst_pair = max(worst_pair, checks["pairing_dev"])
        worst_act = max(worst_act, checks["action_dev"])
    ms = (time.monotonic() - t0) * 1e3
    ok = worst_pair < 1e-8
    ok_all = ok_all and ok
    rep.add("gravity.reduced-pairing", "gravity.reduced-pairing", ok,
            fmt_residual(worst_pair), ms)
    ok = worst_act < 1e-8
    ok_all = ok_all and ok
    rep.add("gravity.reduced-action", "gravity.reduced-action", ok,
            fmt_residual(worst_act), 0.0)
    return ok_all


_STAGE_FN = {
    "validate": _stage_validate,
    "bfv": _stage_bfv,
    "double": _stage_double,
    "cohomology": _stage_cohomology,
    "quantize": _stage_quantize,
    "gravity": _stage_gravity,
}


def run(spec: RunSpec) -> RunReport:
    """Execute the stages of a run description in order.

    A failed stage marks its dependents skipped rather than running
    them on data that did not check out.
    """
    rep = RunReport(target=spec.target, stages=list(spec.stages),
                    seed=spec.seed, max_degree=spec.max_degree)
    system = spec.system if spec.system is not None else get_system(spec.target)
    ctx = {"spec": spec, "system": system}
    failed = set()
    for stage in spec.stages:
        dep = STAGE_DEPS.get(stage)
        if dep is not None and dep in failed:
            rep.rows.append(ReportRow(stage, "%s.skipped" % stage,
                                      "skip", "-", 0.0))
            failed.add(stage)
            continue
        try:
            ok = _STAGE_FN[stage](rep, ctx)
        except ValueError as e:
            rep.add("%s.build" % stage, "%s.build" % stage, False,
                    str(e)[:200])
            ok = False
        if not ok:
            failed.add(stage)
    return rep


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="bfvkit",
        description="Run verification pipelines over constraint systems "
                    "and the surface gravity models.")
    ap.add_argument("--spec", required=True, help="run description file")
    ap.add_argument("--stage", action="append", dest="stages", metavar="NAME",
                    help="override the stage list (repeatable, in order)")
    ap.add_argument("--out", help="structured report path (a .txt table "
                                  "is written next to it)")
    ap.add_argument("--seed", type=int, help="override the run seed")
    ap.add_argument("--max-degree", type=int, dest="max_degree",
                    help="override the truncation window")
    ap.add_argument("--timings", action="store_true",
                    help="real wall times in the structured report "
                         "(gives up byte determinism)")
    args = ap.parse_args(argv)

    try:
        spec = load_spec(args.spec)
    except OSError as e:
        print("cannot read run description: %s" % e, file=sys.stderr)
        return 2
    except SpecError as e:
        print("invalid run description:\n%s" % e, file=sys.stderr)
        return 2

    if args.stages:
        from .specfile import STAGES
        for st in args.stages:
            if st not in STAGES:
                print("unknown stage %r" % st, file=sys.stderr)
                return 2
        spec.stages = list(args.stages)
    if args.seed is not None:
        spec.seed = args.seed
    if args.max_degree is not None:
        spec.max_degree = args.max_degree
    out = args.out if args.out is not None else spec.out

    try:
        rep = run(spec)
    except SpecError as e:
        print("invalid run description:\n%s" % e, file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - the contract maps these to 3
        print("internal error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 3

    if out:
        try:
            emit_report(rep, out, timings=args.timings)
        except OSError as e:
            print("cannot write report: %s" % e, file=sys.stderr)
            return 3
    print(render_table(rep), end="")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
