"""Default numerical tolerances.

All are absolute. Functions accept per-call overrides; the CLI additionally
reads ``STOT_TOL`` from the environment.
"""

from dataclasses import dataclass, replace
import os

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-12
TRACE_TOL = 1e-12
SPECTRAL_RESIDUAL_TOL = 1e-10
MEASUREMENT_TOL = 1e-10
TP_TOL = 1e-10
CP_TOL = 1e-10
KRAUS_RANK_TOL = 1e-12
STATE_OVER_TIME_TOL = 1e-10
CLASSIFY_PSD_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-10
SUPPORT_TOL = 1e-12
BAYES_CP_TOL = 1e-8
COND_TOL = 1e-10
CHECK_TOL = 1e-10


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle used by the CLI verification commands."""

    check: float = CHECK_TOL
    cp: float = BAYES_CP_TOL
    cond: float = COND_TOL
    classify_psd: float = CLASSIFY_PSD_TOL

    def override(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: float(v) for k, v in kwargs.items() if v is not None})


def from_env(base: Tolerances | None = None) -> Tolerances:
    base = base or Tolerances()
    raw = os.environ.get("STOT_TOL")
    if raw is None or raw.strip() == "":
        return base
    return base.override(check=float(raw))
