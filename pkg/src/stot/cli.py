"""Command-line front end.

Exit codes: 0 all checks passed, 1 a contract check failed, 2 bad input.
Machine output (JSON, or CSV with ``--csv``) goes to stdout or ``--out``;
the human-readable summary goes to stderr unless ``--quiet``.
"""

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import config
from .bayes import (
    Status,
    bayesian_inverse,
    reversed_mh,
    spatiotemporal_bayes_check,
    time_reversal_residual,
    verify_bayes_rule,
)
from .channels import (
    amplitude_damping,
    depolarizing_channel,
    discard_and_prepare,
    erasure_channel,
    identity_channel,
    unitary_channel,
)
from .distributions import born_evaluate, disturbance_term, lvn_distribution, mh_distribution
from .errors import NoSolution, StotError
from .explorer import (
    Budget,
    bloch_grid,
    born_existence_check,
    mh_oracle,
    qubit_necessity_scan,
    reconstruct_from_mh,
    search_max_disturbance,
)
from .operators import HADAMARD
from .serialize import (
    InputError,
    channel_from_json,
    dumps,
    load_json,
    matrix_to_json,
    scenario_from_json,
    scenario_to_json,
    state_from_json,
)
from .state_over_time import spectrum_report, state_over_time

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

GLOBAL_DEFAULTS = {"tol": None, "seed": None, "csv": False, "out": None, "quiet": False}


class Output:
    """Collects machine and human output; nothing is written until ``flush``."""

    def __init__(self, args):
        self.args = args
        self.machine = io.StringIO()
        self.human = io.StringIO()

    def data(self, text: str):
        self.machine.write(text)
        if not text.endswith("\n"):
            self.machine.write("\n")

    def say(self, text: str = ""):
        self.human.write(text + "\n")

    def flush(self):
        if self.args.out:
            Path(self.args.out).write_text(self.machine.getvalue())
        else:
            sys.stdout.write(self.machine.getvalue())
        if not self.args.quiet:
            sys.stderr.write(self.human.getvalue())


def format_table(d) -> str:
    head = [d.kind.value, *d.col_labels]
    rows = [[lab, *(f"{x: .6f}" for x in row)] for lab, row in zip(d.row_labels, d.values)]
    widths = [max(len(r[c]) for r in [head, *rows]) for c in range(len(head))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in [head, *rows])


def _tolerance(args, doc, default: float) -> float:
    """default < STOT_TOL < file "tolerances.check" < --tol."""
    tol = config.from_env(config.Tolerances(check=default)).check
    if isinstance(doc, dict) and isinstance(doc.get("tolerances"), dict):
        raw = doc["tolerances"].get("check")
        if raw is not None:
            if not isinstance(raw, (int, float)) or isinstance(raw, bool) or raw <= 0:
                raise InputError("$.tolerances.check", "expected a positive number")
            tol = float(raw)
    if args.tol is not None:
        tol = args.tol
    return tol


def _load_scenario(path):
    return _load(path, scenario_from_json)


def _load(path, parse):
    doc = load_json(path)
    try:
        return doc, parse(doc)
    except InputError as exc:
        raise InputError(f"{path}:{exc.path}", str(exc).split(": ", 1)[1]) from exc


# -- commands -------------------------------------------------------------------------------------

def cmd_evaluate(args, out: Output) -> int:
    doc, s = _load_scenario(args.scenario)
    tol = _tolerance(args, doc, config.CHECK_TOL)
    p, q, d, b = lvn_distribution(s), mh_distribution(s), disturbance_term(s), born_evaluate(s)
    identity_residual = float(np.max(np.abs(q.values - p.values - d.values)))
    born_residual = float(np.max(np.abs(q.values - b.values)))
    passed = identity_residual <= tol and born_residual <= tol
    tables = {"lvn": p, "mh": q, "disturbance": d, "born": b}
    if args.csv:
        out.data("\n".join(t.to_csv() for t in tables.values()))
    else:
        out.data(dumps({
            "tables": {k: t.to_dict() for k, t in tables.items()},
            "identity_residual": identity_residual,
            "born_residual": born_residual,
            "tol": tol,
            "passed": passed,
        }))
    for t in tables.values():
        out.say(format_table(t))
        out.say()
    out.say(f"max|Q - P - D| = {identity_residual:.3e}")
    out.say(f"max|Q - born|  = {born_residual:.3e}")
    out.say("PASS" if passed else f"FAIL (tol {tol:.1e})")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_spectrum(args, out: Output) -> int:
    _, rho = _load(args.state, state_from_json)
    _, e = _load(args.channel, channel_from_json)
    if rho.dim != e.dim_in:
        raise InputError(str(args.channel), f"channel input dimension {e.dim_in} != state dimension {rho.dim}")
    rep = spectrum_report(state_over_time(rho, e))
    out.data(dumps(rep.to_dict()))
    out.say("eigenvalues: " + " ".join(f"{x:.6f}" for x in rep.eigenvalues))
    out.say(f"negativity {rep.negativity:.6f}  causality measure {rep.causality_measure:.6f}  "
            f"psd {rep.is_psd}" + ("  (borderline)" if rep.borderline else ""))
    return EXIT_OK


def cmd_invert(args, out: Output) -> int:
    _, rho = _load(args.state, state_from_json)
    _, e = _load(args.channel, channel_from_json)
    if rho.dim != e.dim_in:
        raise InputError(str(args.channel), f"channel input dimension {e.dim_in} != state dimension {rho.dim}")
    try:
        res = bayesian_inverse(e, rho)
    except NoSolution as exc:
        out.data(dumps({"status": Status.NO_SOLUTION.value, "blocks": exc.blocks, "residual": exc.residual}))
        out.say(str(exc))
        return EXIT_FAIL
    out.data(dumps(res.to_dict()))
    out.say(f"status {res.status.value}  residual {res.residual:.3e}  "
            f"min Choi eigenvalue {res.min_choi_eigenvalue:.3e}")
    if res.channel is not None:
        out.say(f"recovered channel: {len(res.channel.kraus)} Kraus operators")
    return EXIT_OK if res.status is Status.EXACT else EXIT_FAIL


def cmd_verify(args, out: Output) -> int:
    doc, s = _load_scenario(args.scenario)
    _, f = _load(args.inverse, channel_from_json)
    if (f.dim_in, f.dim_out) != (s.channel.dim_out, s.channel.dim_in):
        raise InputError(str(args.inverse), "inverse channel dimensions do not reverse the forward channel")
    tol = _tolerance(args, doc, config.CHECK_TOL)
    bayes = verify_bayes_rule(s.channel, s.rho, f)
    reversal = time_reversal_residual(s, f)
    cells = spatiotemporal_bayes_check(s, f, tol=max(tol, 1e-8))
    passed = bayes <= tol and reversal <= tol and cells.passed
    out.data(dumps({
        "bayes_rule_residual": bayes,
        "time_reversal_residual": reversal,
        "reversed_mh": reversed_mh(s, f).to_dict(),
        "spatiotemporal_bayes": cells.to_dict(),
        "tol": tol,
        "passed": passed,
    }))
    out.say(f"||S rho_BA S - rho_AB||_F = {bayes:.3e}")
    out.say(f"max|Q(i,j) - Qbar(j,i)|   = {reversal:.3e}")
    out.say(f"Bayes' rule cells: max residual {cells.max_residual:.3e}, "
            f"{len(cells.undefined)} undefined")
    out.say("PASS" if passed else f"FAIL (tol {tol:.1e})")
    return EXIT_OK if passed else EXIT_FAIL


def default_qubit_channels():
    return [
        ("identity", identity_channel(2)),
        ("hadamard", unitary_channel(HADAMARD)),
        ("amplitude_damping_0.3", amplitude_damping(0.3)),
        ("depolarizing_0.5", depolarizing_channel(2, 0.5)),
        ("erasure_0.5", erasure_channel(0.5)),
        ("discard_prepare_0", discard_and_prepare(np.diag([1.0, 0.0]), 2)),
        ("discard_prepare_mixed", discard_and_prepare(np.array([[0.7, 0.2], [0.2, 0.3]]), 2)),
        ("depolarizing_1", depolarizing_channel(2, 1.0)),
    ]


def cmd_search(args, out: Output) -> int:
    seed = 0 if args.seed is None else args.seed
    budget = Budget.from_size(args.budget, seed)
    if args.mode == "qubit-scan":
        rep = qubit_necessity_scan(bloch_grid(), default_qubit_channels(), budget=Budget(16, 60, 2, seed))
        out.data(dumps(rep.to_dict()))
        out.say(f"scanned {len(rep.entries)} pairs, {len(rep.passing)} within tolerance, "
                f"{len(rep.anomalies)} anomalies")
        return EXIT_OK
    if args.scenario is None:
        raise InputError("scenario", f"mode {args.mode} needs a scenario file")
    _, s = _load_scenario(args.scenario)
    if args.mode == "max-disturbance":
        res = search_max_disturbance(s.rho, s.channel, budget)
        out.data(dumps({"mode": args.mode, "value": res.value, "evaluations": res.evaluations,
                        "seed": seed, "scenario": scenario_to_json(res.scenario)}))
        out.say(f"max |D| found: {res.value:.6f} ({res.evaluations} evaluations)")
    else:
        rep = born_existence_check(s.rho, s.channel, budget)
        out.data(dumps({"mode": args.mode, "seed": seed, **rep.to_dict()}))
        out.say(f"{rep.verdict.value}: max violation {rep.max_violation:.6f}")
    return EXIT_OK


def cmd_tomo(args, out: Output) -> int:
    doc, s = _load_scenario(args.scenario)
    tol = _tolerance(args, doc, 1e-8)
    res = reconstruct_from_mh(mh_oracle(s.rho, s.channel), (s.channel.dim_in, s.channel.dim_out))
    target = state_over_time(s.rho, s.channel)
    err = float(np.linalg.norm(res.matrix - target.matrix))
    out.data(dumps({
        "reconstruction": matrix_to_json(res.matrix),
        "frobenius_error": err,
        "lstsq_residual": res.residual,
        "smallest_singular_value": res.smallest_singular_value,
        "tol": tol,
        "passed": err <= tol,
    }))
    out.say(f"||reconstruction - state over time||_F = {err:.3e}  "
            f"(frame smallest singular value {res.smallest_singular_value:.4f})")
    return EXIT_OK if err <= tol else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    # every copy of a global flag defaults to SUPPRESS so a subcommand cannot
    # clobber a value given before it; real defaults are filled in by main()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                        help="check tolerance (overrides STOT_TOL and file)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--csv", action="store_true", default=argparse.SUPPRESS, help="emit tables as CSV")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write machine output to this path")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress the human summary")
    parser = argparse.ArgumentParser(prog="stot", parents=[common],
                                     description="Sequential-measurement distributions and states over time.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="P, Q, D and Born tables for a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("spectrum", parents=[common], help="spectrum of the state over time")
    p.add_argument("state")
    p.add_argument("channel")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("invert", parents=[common], help="Bayesian inverse of a channel")
    p.add_argument("state")
    p.add_argument("channel")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("verify", parents=[common], help="check a candidate Bayesian inverse")
    p.add_argument("scenario")
    p.add_argument("inverse")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", parents=[common], help="bounded numerical searches")
    p.add_argument("mode", choices=["max-disturbance", "born-existence", "qubit-scan"])
    p.add_argument("scenario", nargs="?")
    p.add_argument("--budget", type=int, default=200)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("tomo", parents=[common], help="reconstruct the state over time from Q values")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_tomo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    out = Output(args)
    try:
        code = args.func(args, out)
    except (StotError, ValueError) as exc:
        msg = str(exc) if isinstance(exc, InputError) else f"invalid input: {exc}"
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_INPUT
    out.flush()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
