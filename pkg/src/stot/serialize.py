"""JSON encoding of matrices, states, measurements, channels and scenarios.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested lists
of them. Decoding errors carry a JSON path such as ``$.pvm_a.projectors[1]``.
"""

import json
import re
from pathlib import Path

import numpy as np

from .channels import DensityOperator, ProjectiveMeasurement, QuantumChannel
from .distributions import TPSMScenario
from .errors import StotError


class InputError(StotError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(m) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m, dtype=complex)]


def _number(x, path: str) -> complex:
    if isinstance(x, bool):
        raise InputError(path, "expected a number or [re, im] pair")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise InputError(path, "expected a number or [re, im] pair")


def matrix_from_json(obj, path: str = "$") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InputError(path, "expected a non-empty list of rows")
    width = len(obj[0])
    rows = []
    for r, row in enumerate(obj):
        if len(row) != width:
            raise InputError(f"{path}[{r}]", f"row has {len(row)} entries, expected {width}")
        rows.append([_number(x, f"{path}[{r}][{c}]") for c, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def _field(obj, key: str, path: str):
    if not isinstance(obj, dict):
        raise InputError(path, "expected an object")
    if key not in obj:
        raise InputError(f"{path}.{key}", "missing field")
    return obj[key]


def _build(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError:
        raise
    except (StotError, ValueError) as exc:
        raise InputError(path, str(exc)) from exc


def state_to_json(rho: DensityOperator) -> dict:
    return {"matrix": matrix_to_json(rho.matrix)}


def state_from_json(obj, path: str = "$") -> DensityOperator:
    m = matrix_from_json(_field(obj, "matrix", path), f"{path}.matrix")
    return _build(path, DensityOperator, m, psd_tol=1e-10, trace_tol=1e-10)


def pvm_to_json(pvm: ProjectiveMeasurement) -> dict:
    return {"projectors": [matrix_to_json(p) for p in pvm.projectors], "labels": list(pvm.labels)}


def pvm_from_json(obj, path: str = "$") -> ProjectiveMeasurement:
    raw = _field(obj, "projectors", path)
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{path}.projectors", "expected a non-empty list of matrices")
    ps = [matrix_from_json(p, f"{path}.projectors[{k}]") for k, p in enumerate(raw)]
    labels = obj.get("labels")
    if labels is not None and not isinstance(labels, list):
        raise InputError(f"{path}.labels", "expected a list of strings")
    return _build(path, ProjectiveMeasurement, ps, labels)


def channel_to_json(e: QuantumChannel) -> dict:
    return {"dim_in": e.dim_in, "dim_out": e.dim_out, "kraus": [matrix_to_json(k) for k in e.kraus]}


def channel_from_json(obj, path: str = "$") -> QuantumChannel:
    raw = _field(obj, "kraus", path)
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{path}.kraus", "expected a non-empty list of matrices")
    ks = [matrix_from_json(k, f"{path}.kraus[{n}]") for n, k in enumerate(raw)]
    for key, axis in (("dim_out", 0), ("dim_in", 1)):
        if key in obj and obj[key] != ks[0].shape[axis]:
            raise InputError(f"{path}.{key}", f"declared {obj[key]}, Kraus operators have {ks[0].shape[axis]}")
    return _build(path, QuantumChannel, ks)


def scenario_to_json(s: TPSMScenario, **extra) -> dict:
    doc = {
        "rho": state_to_json(s.rho),
        "pvm_a": pvm_to_json(s.pvm_a),
        "channel": channel_to_json(s.channel),
        "pvm_b": pvm_to_json(s.pvm_b),
    }
    doc.update({k: v for k, v in extra.items() if v is not None})
    return doc


def scenario_from_json(obj, path: str = "$") -> TPSMScenario:
    rho = state_from_json(_field(obj, "rho", path), f"{path}.rho")
    pvm_a = pvm_from_json(_field(obj, "pvm_a", path), f"{path}.pvm_a")
    channel = channel_from_json(_field(obj, "channel", path), f"{path}.channel")
    pvm_b = pvm_from_json(_field(obj, "pvm_b", path), f"{path}.pvm_b")
    return _build(path, TPSMScenario, rho, pvm_a, channel, pvm_b)


def load_json(path) -> object:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(str(p), f"cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}:$", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


_NUM = r"-?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|Infinity|NaN)"
_FLAT_LIST = re.compile(r"\[\s*(" + _NUM + r"(?:,\s*" + _NUM + r")*)\s*\]")


def dumps(obj) -> str:
    """Indented JSON with innermost numeric lists kept on one line."""
    text = json.dumps(obj, indent=2)
    return _FLAT_LIST.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
