"""Bayesian inversion of channels with respect to a prior state.

A channel ``F: B -> A`` is a Bayesian inverse of ``E: A -> B`` with respect to
``rho`` when ``S varrho_BA S = varrho_AB``, where
``varrho_BA = 1/2 {E(rho) (x) 1, J[F]}``. Since ``varrho_BA`` is linear in
``J[F]``, the inverse is found by solving

    1/2 {sigma (x) 1, X} = S varrho_AB S,    sigma = E(rho),

for ``X = J[F]``. In the eigenbasis of ``sigma`` the equation decouples into
blocks ``(s_k + s_l)/2 X_kl = C_kl``.
"""

from dataclasses import dataclass, field
import enum
from typing import NamedTuple

import numpy as np

from . import config
from .channels import DensityOperator, QuantumChannel, apply, apply_state, channel_from_jamiolkowski
from .distributions import JointQuasiDistribution, Kind, TPSMScenario, mh_distribution
from .errors import DimensionMismatch, NoSolution, StotError
from .operators import (
    BipartiteIndex,
    anticommutator,
    eig_hermitian,
    partial_trace,
    partial_transpose,
    swap_conjugate,
)
from .state_over_time import state_over_time


class AnticommutatorSolution(NamedTuple):
    solution: np.ndarray
    residual: float
    kernel: np.ndarray          # eigenbasis indices k with s_k treated as zero
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def solve_anticommutator(sigma, c, support_tol: float = config.SUPPORT_TOL) -> AnticommutatorSolution:
    """Solve ``1/2 {sigma (x) 1_A, X} = c`` for ``X`` on ``H_B (x) H_A``.

    Blocks with ``s_k + s_l <= support_tol`` are set to zero when the target
    block is itself below ``support_tol`` in Frobenius norm; otherwise
    :class:`NoSolution` is raised listing every offending ``(k, l)``.
    """
    sigma = sigma.matrix if isinstance(sigma, DensityOperator) else np.asarray(sigma, dtype=complex)
    c = np.asarray(c, dtype=complex)
    db = sigma.shape[0]
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % db:
        raise DimensionMismatch(f"target of shape {c.shape} is not bipartite over a {db}-dim factor")
    da = c.shape[0] // db
    s, u = eig_hermitian(sigma)
    w = np.kron(u, np.eye(da))
    blocks = (w.conj().T @ c @ w).reshape(db, da, db, da)
    denom = s[:, None] + s[None, :]
    block_norms = np.linalg.norm(blocks, axis=(1, 3))
    singular = denom <= support_tol
    bad = np.argwhere(singular & (block_norms > support_tol))
    if len(bad):
        raise NoSolution(bad, float(block_norms[singular].max()))
    safe = np.where(singular, 1.0, denom)
    x_blocks = np.where(singular[:, None, :, None], 0.0, 2 * blocks / safe[:, None, :, None])
    x = w @ x_blocks.reshape(db * da, db * da) @ w.conj().T
    residual = _residual(sigma, x, c)
    return AnticommutatorSolution(x, residual, np.flatnonzero(2 * s <= support_tol), s, u)


def _residual(sigma, x, c) -> float:
    da = c.shape[0] // sigma.shape[0]
    return float(np.linalg.norm(0.5 * anticommutator(np.kron(sigma, np.eye(da)), x) - c))


class Status(str, enum.Enum):
    EXACT = "Exact"
    APPROXIMATE_CP = "ApproximateCP"
    NO_SOLUTION = "NoSolution"


@dataclass(frozen=True)
class BayesianInverseResult:
    status: Status
    channel: QuantumChannel | None
    jamiolkowski_solution: np.ndarray
    residual: float
    min_choi_eigenvalue: float
    tp_residual: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .serialize import matrix_to_json

        return {
            "status": self.status.value,
            "residual": self.residual,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
            "tp_residual": self.tp_residual,
            "kraus": None if self.channel is None else [matrix_to_json(k) for k in self.channel.kraus],
            "diagnostics": self.diagnostics,
        }


def bayesian_inverse(e: QuantumChannel, rho: DensityOperator, cp_tol: float = config.BAYES_CP_TOL,
                     support_tol: float = config.SUPPORT_TOL) -> BayesianInverseResult:
    """Solve the quantum Bayes' rule for ``J[F]`` and classify the result.

    Where ``E(rho)`` has a kernel the equation leaves the kernel-kernel blocks
    free. They are filled with ``|k><k| (x) 1_A / d_A`` on the diagonal and zero
    elsewhere: the least-norm completion that keeps ``F`` trace preserving.
    """
    if rho.dim != e.dim_in:
        raise DimensionMismatch(f"state has dimension {rho.dim}, channel input is {e.dim_in}")
    forward = state_over_time(rho, e)
    target = swap_conjugate(forward.matrix, forward.idx)
    sigma = apply(e, rho.matrix)
    sol = solve_anticommutator(sigma, target, support_tol)
    da, db = e.dim_in, e.dim_out
    x = sol.solution
    for k in sol.kernel:
        v = sol.eigenvectors[:, k]
        x = x + np.kron(np.outer(v, v.conj()), np.eye(da) / da)
    x = (x + x.conj().T) / 2
    idx = BipartiteIndex(db, da)
    tp_residual = float(np.max(np.abs(partial_trace(x, idx, "B") - np.eye(db))))
    min_eig = float(np.linalg.eigvalsh(partial_transpose(x, idx, "A"))[0])
    diagnostics = {
        "sigma_eigenvalues": [float(v) for v in sol.eigenvalues],
        "support_rank": int(db - len(sol.kernel)),
        "kernel_dim": int(len(sol.kernel)),
        "solver_residual": sol.residual,
    }
    residual = _residual(sigma, x, target)
    channel = None
    status = Status.APPROXIMATE_CP
    if min_eig >= -cp_tol and tp_residual <= cp_tol:
        try:
            channel = channel_from_jamiolkowski(x, idx, cp_tol=cp_tol, tp_tol=cp_tol)
            status = Status.EXACT
        except StotError as exc:  # pragma: no cover - guarded by the checks above
            diagnostics["reconstruction_error"] = str(exc)
    return BayesianInverseResult(status, channel, x, residual, min_eig, tp_residual, diagnostics)


def verify_bayes_rule(e: QuantumChannel, rho: DensityOperator, f: QuantumChannel) -> float:
    """``||S varrho_BA S - varrho_AB||_F`` for the candidate inverse ``f``."""
    if (f.dim_in, f.dim_out) != (e.dim_out, e.dim_in):
        raise DimensionMismatch(f"candidate inverse {f!r} does not map back from {e!r}")
    forward = state_over_time(rho, e)
    backward = state_over_time(apply_state(e, rho), f)
    return float(np.linalg.norm(swap_conjugate(backward.matrix, backward.idx) - forward.matrix))


def reversed_scenario(s: TPSMScenario, f: QuantumChannel) -> TPSMScenario:
    """The operational time reversal ``(E(rho), {Q_j}, F, {P_i})``."""
    if (f.dim_in, f.dim_out) != (s.channel.dim_out, s.channel.dim_in):
        raise DimensionMismatch(f"{f!r} cannot reverse {s.channel!r}")
    return TPSMScenario(apply_state(s.channel, s.rho), s.pvm_b, f, s.pvm_a)


def reversed_mh(s: TPSMScenario, f: QuantumChannel) -> JointQuasiDistribution:
    """Margenau-Hill table of the reversed scenario, indexed ``(j, i)``."""
    q = mh_distribution(reversed_scenario(s, f))
    return JointQuasiDistribution(q.values, q.row_labels, q.col_labels, Kind.REVERSED_MH)


def time_reversal_residual(s: TPSMScenario, f: QuantumChannel) -> float:
    """``max |Q(i,j) - Qbar(j,i)|``."""
    return float(np.max(np.abs(mh_distribution(s).values - reversed_mh(s, f).values.T)))


@dataclass(frozen=True)
class BayesCell:
    i: str
    j: str
    defined: bool
    forward_conditional: float | None    # Q(j|i)
    backward_conditional: float | None   # Qbar(i|j)
    residual: float


@dataclass(frozen=True)
class SpatiotemporalBayesReport:
    cells: tuple
    tol: float
    cond_tol: float

    @property
    def passed(self) -> bool:
        return all(c.residual <= self.tol for c in self.cells)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.cells), default=0.0)

    @property
    def undefined(self) -> list:
        return [(c.i, c.j) for c in self.cells if not c.defined]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "undefined_cells": [list(x) for x in self.undefined],
            "cells": [
                {"i": c.i, "j": c.j, "defined": c.defined, "Q(j|i)": c.forward_conditional,
                 "Qbar(i|j)": c.backward_conditional, "residual": c.residual}
                for c in self.cells
            ],
        }


def spatiotemporal_bayes_check(s: TPSMScenario, f: QuantumChannel, tol: float = 1e-8,
                               cond_tol: float = config.COND_TOL) -> SpatiotemporalBayesReport:
    """Check ``Q(j|i) Q(i) = Qbar(i|j) Qbar(j)`` cell by cell.

    Conditionals are plain quotients, sign kept. Where a marginal is within
    ``cond_tol`` of zero the cell is marked undefined and ``Q(i,j) = Qbar(j,i)``
    is checked instead.
    """
    q = mh_distribution(s).values
    qbar = reversed_mh(s, f).values
    q_i = q.sum(axis=1)
    qbar_j = qbar.sum(axis=1)
    cells = []
    for i, li in enumerate(s.pvm_a.labels):
        for j, lj in enumerate(s.pvm_b.labels):
            if abs(q_i[i]) > cond_tol and abs(qbar_j[j]) > cond_tol:
                fwd = q[i, j] / q_i[i]
                bwd = qbar[j, i] / qbar_j[j]
                res = abs(fwd * q_i[i] - bwd * qbar_j[j])
                cells.append(BayesCell(li, lj, True, float(fwd), float(bwd), float(res)))
            else:
                cells.append(BayesCell(li, lj, False, None, None, float(abs(q[i, j] - qbar[j, i]))))
    return SpatiotemporalBayesReport(tuple(cells), tol, cond_tol)
