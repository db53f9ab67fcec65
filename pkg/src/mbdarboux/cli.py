"""Command-line front end.

    mbdarboux generate|verify|reconcile|perturb --config CFG --out PATH [--h H] [--order 2|4]

Exit codes: 0 success, 1 verification failed, 2 invalid config,
3 singular evaluation point, 4 output could not be written.
"""
import argparse
import csv
import io
import sys

import numpy as np

from . import config as cfgmod
from .closedforms import reconcile
from .darboux import evaluate_chain
from .errors import ConfigError, ConvergenceFailure, NormDriftExceeded, SingularityError
from .model import (CorruptedState, conservation_report, map_chunks, residual_mb,
                    residual_pure, residual_zcr_state)
from .perturbation import finite_difference_validation, linearized_residual, superpose_symmetries

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_IO = 4


def _fmt(v):
    return repr(float(v))


def _state(sc):
    state = evaluate_chain(sc.chain)
    if sc.corrupt:
        state = CorruptedState(state, **sc.corrupt)
    return state


def field_table(sc):
    """CSV text of the fields (and per-node Bloch components) over the grid."""
    state = _state(sc)
    tau, zeta = sc.grid.flat()
    parts = map_chunks(lambda t, z: state.evaluate(t, z), tau, zeta)
    U = np.concatenate([p.U for p in parts])
    A = np.concatenate([p.A for p in parts])
    em, ep = U[:, 2, 0], U[:, 2, 1]
    header = ["tau", "zeta", "re_em", "im_em", "re_ep", "im_ep"]
    M = A.shape[1] if sc.per_node else 0
    for k in range(M):
        header += [f"{n}_{k}" for n in ("n_am", "n_ap", "n_b", "re_nup", "im_nup",
                                         "re_num", "im_num", "re_nua", "im_nua")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i in range(len(tau)):
        row = [tau[i], zeta[i], em[i].real, em[i].imag, ep[i].real, ep[i].imag]
        for k in range(M):
            a = A[i, k]
            row += [a[0, 0].real, a[1, 1].real, a[2, 2].real, a[2, 1].real, a[2, 1].imag,
                    a[2, 0].real, a[2, 0].imag, a[0, 1].real, a[0, 1].imag]
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _perturbation_field(sc, state):
    contour = sc.perturbation["contour"] if sc.perturbation else None
    if contour is None:
        raise ConfigError("perturbation.terms", "needed for a linearized residual")
    return superpose_symmetries(state, contour)


def verify_report(sc):
    """Return ``(text, passed)`` for the requested checks."""
    state = _state(sc)
    lines = []
    passed = True
    checks = list(sc.checks)
    if "pure" in checks and not state.has_pure:
        lines.append("pure=skipped (mixed state)")
        checks.remove("pure")
    for name in checks:
        tol = sc.tolerances[name]
        if name == "conservation":
            rep = conservation_report(state, sc.grid)
            worst = max(v for v in rep.values() if v is not None)
            for k, v in rep.items():
                lines.append(f"conservation.{k}={'none' if v is None else _fmt(v)}")
            ok = worst <= tol
        else:
            if name == "mb":
                rep = residual_mb(state, sc.grid, sc.h, sc.order)
            elif name == "pure":
                rep = residual_pure(state, sc.grid, sc.h, sc.order)
            elif name == "zcr":
                rep = residual_zcr_state(state, sc.grid, sc.h, sc.order)
            else:
                rep = linearized_residual(state, _perturbation_field(sc, state), sc.grid,
                                          sc.h, sc.order)
            lines.append(rep.to_text().rstrip("\n"))
            ok = rep.passed(tol)
        lines.append(f"{name}.tolerance={_fmt(tol)}")
        lines.append(f"{name}.status={'PASS' if ok else 'FAIL'}")
        passed = passed and ok
    lines.append(f"status={'PASS' if passed else 'FAIL'}")
    return "\n".join(lines) + "\n", passed


def reconcile_outputs(sc):
    """``(csv_text, markdown_text)`` for the configured closed form."""
    if sc.closed_form is None:
        raise ConfigError("closed_form", "missing")
    cf = sc.closed_form
    entry = reconcile(cf["family"], cf["params"], sc.grid, sc.detuning, cf["mode"])
    return entry.to_csv(), entry.to_markdown(), entry


def perturb_outputs(sc):
    """``(report_text, convergence_csv_or_None, passed)``."""
    if sc.perturbation is None:
        raise ConfigError("perturbation", "missing")
    state = evaluate_chain(sc.chain)
    lines = []
    passed = True
    if sc.perturbation["contour"] is not None:
        rep = linearized_residual(state, _perturbation_field(sc, state), sc.grid, sc.h, sc.order)
        tol = sc.tolerances["linearized"]
        lines.append(rep.to_text().rstrip("\n"))
        lines.append(f"linearized.tolerance={_fmt(tol)}")
        ok = rep.passed(tol)
        lines.append(f"linearized.status={'PASS' if ok else 'FAIL'}")
        passed = ok
    table_csv = None
    conv = sc.perturbation["convergence"]
    if conv is not None:
        table = finite_difference_validation(state, conv["mu"], conv["deltas"], conv["right"],
                                             conv["left"], conv["grid"] or sc.grid,
                                             conv["direction"], check=False)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "err_U", "err_A", "order"])
        for d, u, a, o in table.rows():
            w.writerow([_fmt(d), _fmt(u), _fmt(a), "" if o is None else _fmt(o)])
        table_csv = buf.getvalue()
        lines.append("convergence.orders=" + ",".join(_fmt(o) for o in table.orders))
        lines.append(f"convergence.status={'PASS' if table.converged else 'FAIL'}")
        passed = passed and table.converged
    lines.append(f"status={'PASS' if passed else 'FAIL'}")
    return "\n".join(lines) + "\n", table_csv, passed


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def build_parser():
    ap = argparse.ArgumentParser(prog="mbdarboux",
                                 description="Darboux-dressed Maxwell-Bloch solutions and their checks")
    ap.add_argument("command", choices=("generate", "verify", "reconcile", "perturb"))
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", required=True, help="output path")
    ap.add_argument("--h", type=float, default=None, help="finite-difference step")
    ap.add_argument("--order", type=int, choices=(2, 4), default=None,
                    help="finite-difference order")
    return ap


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = cfgmod.load(args.config)
        if args.h is not None:
            if not args.h > 0:
                raise ConfigError("--h", "must be positive")
            sc.h = args.h
        if args.order is not None:
            sc.order = args.order
        status = EXIT_OK
        outputs = {}
        if args.command == "generate":
            outputs[args.out] = field_table(sc)
        elif args.command == "verify":
            text, ok = verify_report(sc)
            outputs[args.out] = text
            status = EXIT_OK if ok else EXIT_FAILED
        elif args.command == "reconcile":
            csv_text, md, _ = reconcile_outputs(sc)
            outputs[args.out] = csv_text
            outputs[args.out + ".md"] = md
        else:
            text, table_csv, ok = perturb_outputs(sc)
            outputs[args.out] = text
            if table_csv is not None:
                outputs[args.out + ".csv"] = table_csv
            status = EXIT_OK if ok else EXIT_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularityError as exc:
        step = f" (step {exc.step})" if exc.step is not None else ""
        print(f"singular evaluation{step}: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (NormDriftExceeded, ConvergenceFailure) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    try:
        for path, text in outputs.items():
            _write(path, text)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
