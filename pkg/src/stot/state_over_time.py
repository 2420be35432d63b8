"""The canonical state over time ``1/2 {rho (x) 1, J[E]}`` and its spectrum."""

from dataclasses import dataclass

import numpy as np

from . import config
from .channels import DensityOperator, QuantumChannel, apply
from .errors import DimensionMismatch, NotNormalized
from .operators import BipartiteIndex, anticommutator, eig_hermitian, hermitian, partial_trace


@dataclass(frozen=True, eq=False)
class StateOverTime:
    """Hermitian unit-trace operator on ``H_A (x) H_B``.

    ``rho`` and ``channel`` record where the operator came from; they are
    ``None`` for operators supplied directly (e.g. tomographic reconstructions).
    """

    idx: BipartiteIndex
    matrix: np.ndarray
    rho: DensityOperator | None = None
    channel: QuantumChannel | None = None

    @classmethod
    def from_matrix(cls, m, idx: BipartiteIndex, trace_tol: float = config.STATE_OVER_TIME_TOL,
                    hermiticity_tol: float = config.HERMITICITY_TOL) -> "StateOverTime":
        h = hermitian(m, hermiticity_tol)
        idx.check(h)
        tr = np.trace(h).real
        if abs(tr - 1) > trace_tol:
            raise NotNormalized(f"state over time has trace {tr!r}")
        return cls(idx, h)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    negativity: float
    causality_measure: float
    is_psd: bool
    borderline: bool = False

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "negativity": float(self.negativity),
            "causality_measure": float(self.causality_measure),
            "is_psd": bool(self.is_psd),
        }


@dataclass(frozen=True)
class MarginalReport:
    residual_a: float
    residual_b: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual_a <= self.tol and self.residual_b <= self.tol


def state_over_time(rho: DensityOperator, e: QuantumChannel) -> StateOverTime:
    if rho.dim != e.dim_in:
        raise DimensionMismatch(f"state has dimension {rho.dim}, channel input is {e.dim_in}")
    j = e.jamiolkowski.matrix
    m = 0.5 * anticommutator(np.kron(rho.matrix, np.eye(e.dim_out)), j)
    return StateOverTime(e.idx, hermitian(m, 1e-10), rho, e)


def spectrum_report(s: StateOverTime, psd_tol: float = config.CLASSIFY_PSD_TOL) -> SpectrumReport:
    """Eigenvalues, negativity ``sum |lambda_i < 0|`` and ``Tr|rho| - 1``.

    ``borderline`` is set when the most negative eigenvalue lies within a
    factor 10 of ``psd_tol`` on either side; such classifications are fragile.
    """
    w = eig_hermitian(s.matrix).eigenvalues
    negativity = float(-w[w < 0].sum())
    causality = float(np.abs(w).sum() - 1.0)
    lo = float(w[0])
    return SpectrumReport(
        eigenvalues=w,
        negativity=negativity,
        causality_measure=max(causality, 0.0),
        is_psd=negativity <= psd_tol,
        borderline=(lo < 0 and psd_tol / 10 < -lo < psd_tol * 10),
    )


def check_marginals(s: StateOverTime, rho=None, channel=None, tol: float = config.STATE_OVER_TIME_TOL) -> MarginalReport:
    """Frobenius residuals of ``Tr_B`` against ``rho`` and ``Tr_A`` against ``E(rho)``."""
    rho = s.rho if rho is None else rho
    channel = s.channel if channel is None else channel
    if rho is None or channel is None:
        raise ValueError("marginal check needs the source state and channel")
    rho_m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    ra = float(np.linalg.norm(partial_trace(s.matrix, s.idx, "B") - rho_m))
    rb = float(np.linalg.norm(partial_trace(s.matrix, s.idx, "A") - apply(channel, rho_m)))
    return MarginalReport(ra, rb, tol)
