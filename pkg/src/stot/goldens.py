"""Bundled example inputs and the CLI golden outputs derived from them.

Everything is rebuilt from closed forms and fixed seeds, so rerunning
``python -m stot.goldens DIR`` reproduces the shipped files byte for byte.
"""

from contextlib import redirect_stdout
import io
from pathlib import Path
import sys

import numpy as np

from . import cli
from .channels import (
    DensityOperator,
    ProjectiveMeasurement,
    erasure_bayesian_inverse,
    erasure_channel,
    identity_channel,
    random_channel,
    random_pvm,
    random_state,
)
from .distributions import TPSMScenario
from .serialize import channel_to_json, dumps, scenario_to_json, state_to_json

DATA_DIR = Path(__file__).parent / "data"

ERASURE_LAMBDA = 0.5
ERASURE_P = 0.25

_PLUS_MINUS = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _plus_minus() -> ProjectiveMeasurement:
    return ProjectiveMeasurement.from_basis(_PLUS_MINUS, labels=["+", "-"])


def inputs() -> dict[str, dict]:
    """File name -> JSON document for every bundled input."""
    erasure = erasure_channel(ERASURE_LAMBDA)
    rho = DensityOperator.diagonal([ERASURE_P, 1 - ERASURE_P])
    mixed = TPSMScenario(DensityOperator.maximally_mixed(3), random_pvm(3, 2, seed=11),
                         random_channel(3, 2, 2, seed=12), random_pvm(2, 2, seed=13))
    seeded = TPSMScenario(random_state(3, 2, seed=7), random_pvm(3, 3, seed=7),
                          random_channel(3, 2, 3, seed=7), random_pvm(2, 2, seed=7))
    return {
        "erasure_channel.json": channel_to_json(erasure),
        "erasure_state.json": state_to_json(rho),
        "erasure_state_half.json": state_to_json(DensityOperator.diagonal([0.5, 0.5])),
        "erasure_inverse.json": channel_to_json(erasure_bayesian_inverse(ERASURE_LAMBDA, ERASURE_P)),
        "erasure_example.json": scenario_to_json(
            TPSMScenario(rho, _plus_minus(), erasure, ProjectiveMeasurement.computational(3))),
        "maximally_mixed.json": scenario_to_json(mixed, seed=11),
        "pure_qubit.json": scenario_to_json(
            TPSMScenario(DensityOperator.pure([1, 0]), _plus_minus(), identity_channel(2),
                         ProjectiveMeasurement.computational(2))),
        "random_seed7.json": scenario_to_json(seeded, seed=7),
    }


def _run(argv) -> str:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main([*argv, "--quiet"])
    if code not in (cli.EXIT_OK, cli.EXIT_FAIL):
        raise RuntimeError(f"golden command {argv} exited with {code}")
    return buf.getvalue()


def goldens(data_dir: Path) -> dict[str, str]:
    """Golden file name -> CLI output, computed from inputs in ``data_dir``."""
    d = Path(data_dir)
    return {
        "erasure_example.csv": _run(["evaluate", str(d / "erasure_example.json"), "--csv"]),
        "maximally_mixed.csv": _run(["evaluate", str(d / "maximally_mixed.json"), "--csv"]),
        "random_seed7.csv": _run(["evaluate", str(d / "random_seed7.json"), "--csv"]),
        "erasure_spectrum_half.json": _run(["spectrum", str(d / "erasure_state_half.json"),
                                            str(d / "erasure_channel.json")]),
        "erasure_invert.json": _run(["invert", str(d / "erasure_state.json"), str(d / "erasure_channel.json")]),
        "pure_qubit_search_seed7.json": _run(["search", "max-disturbance", str(d / "pure_qubit.json"),
                                              "--seed", "7", "--budget", "200"]),
    }


def write_all(data_dir: Path = DATA_DIR) -> list[Path]:
    d = Path(data_dir)
    (d / "golden").mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in inputs().items():
        path = d / name
        path.write_text(dumps(doc) + "\n")
        written.append(path)
    for name, text in goldens(d).items():
        path = d / "golden" / name
        path.write_text(text)
        written.append(path)
    return written


if __name__ == "__main__":  # pragma: no cover
    for p in write_all(Path(sys.argv[1]) if len(sys.argv) > 1 else DATA_DIR):
        print(p)
