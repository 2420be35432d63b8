"""Joint (quasi)distributions of two-point sequential measurements.

A scenario is ``(rho, {P_i}, E, {Q_j})``: prepare ``rho``, measure ``{P_i}``,
evolve with ``E``, measure ``{Q_j}``. For it we compute

* ``P(i,j) = Tr[E(P_i rho P_i) Q_j]``          (Lueders-von Neumann),
* ``Q(i,j) = 1/2 Tr[E(rho P_i + P_i rho) Q_j]``  (Margenau-Hill),
* ``D(i,j) = 1/2 Tr[E(rho - rho_i) Q_j]`` with ``rho_i = P_i rho P_i + (1-P_i) rho (1-P_i)``,

and the pairing ``Tr[varrho (P_i (x) Q_j)]`` against a bipartite operator.
"""

from dataclasses import dataclass, field
import csv
import enum
import io
from typing import Sequence

import numpy as np

from . import config
from .channels import DensityOperator, ProjectiveMeasurement, QuantumChannel, apply
from .errors import DimensionMismatch, ImaginaryResidueExceeded, InvalidMeasurement, InvalidPartition
from .state_over_time import StateOverTime, state_over_time


class Kind(str, enum.Enum):
    LVN = "LVN"
    MH = "MH"
    DISTURBANCE = "DISTURBANCE"
    REVERSED_MH = "REVERSED_MH"
    BORN = "BORN"


@dataclass(frozen=True)
class TPSMScenario:
    rho: DensityOperator
    pvm_a: ProjectiveMeasurement
    channel: QuantumChannel
    pvm_b: ProjectiveMeasurement

    def __post_init__(self):
        if not (self.rho.dim == self.pvm_a.dim == self.channel.dim_in):
            raise DimensionMismatch(
                f"rho ({self.rho.dim}), pvm_a ({self.pvm_a.dim}) and channel input "
                f"({self.channel.dim_in}) must agree")
        if self.channel.dim_out != self.pvm_b.dim:
            raise DimensionMismatch(
                f"channel output ({self.channel.dim_out}) and pvm_b ({self.pvm_b.dim}) must agree")


@dataclass(frozen=True)
class JointQuasiDistribution:
    """Real table indexed by (row outcome, column outcome) labels."""

    values: np.ndarray
    row_labels: tuple
    col_labels: tuple
    kind: Kind
    row_groups: tuple = field(default=())

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.row_labels), len(self.col_labels)):
            raise DimensionMismatch(f"table shape {v.shape} does not match labels")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def row_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0)

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, str):
            i = self.row_labels.index(i)
        if isinstance(j, str):
            j = self.col_labels.index(j)
        return float(self.values[i, j])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "rows": list(self.row_labels),
            "cols": list(self.col_labels),
            "values": [[float(x) for x in row] for row in self.values],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.kind.value, *self.col_labels])
        for label, row in zip(self.row_labels, self.values):
            w.writerow([label, *(repr(float(x)) for x in row)])
        return buf.getvalue()


def _real(z: np.ndarray, tol: float) -> np.ndarray:
    residue = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if residue > tol:
        raise ImaginaryResidueExceeded(residue, tol)
    return z.real


def _table(s: TPSMScenario, kind: Kind, vals) -> JointQuasiDistribution:
    return JointQuasiDistribution(vals, s.pvm_a.labels, s.pvm_b.labels, kind)


def lueders_update(rho, p) -> np.ndarray:
    """``rho_P = P rho P + (1-P) rho (1-P)``: the state after an unread binary measurement."""
    rho = np.asarray(rho, dtype=complex)
    q = np.eye(rho.shape[0]) - p
    return p @ rho @ p + q @ rho @ q


def lvn_distribution(s: TPSMScenario, imag_tol: float = config.IMAG_RESIDUE_TOL) -> JointQuasiDistribution:
    rho = s.rho.matrix
    vals = np.empty((len(s.pvm_a), len(s.pvm_b)), dtype=complex)
    for i, p in enumerate(s.pvm_a.projectors):
        out = apply(s.channel, p @ rho @ p)
        for j, q in enumerate(s.pvm_b.projectors):
            vals[i, j] = np.trace(out @ q)
    return _table(s, Kind.LVN, _real(vals, imag_tol))


def mh_distribution(s: TPSMScenario, imag_tol: float = config.IMAG_RESIDUE_TOL) -> JointQuasiDistribution:
    """Margenau-Hill table; raises :class:`ImaginaryResidueExceeded` on broken inputs."""
    rho = s.rho.matrix
    vals = np.empty((len(s.pvm_a), len(s.pvm_b)), dtype=complex)
    for i, p in enumerate(s.pvm_a.projectors):
        out = apply(s.channel, rho @ p + p @ rho)
        for j, q in enumerate(s.pvm_b.projectors):
            vals[i, j] = 0.5 * np.trace(out @ q)
    return _table(s, Kind.MH, _real(vals, imag_tol))


def _expectation(state, obs) -> complex:
    return np.trace(state @ obs)


def disturbance_term(s: TPSMScenario, imag_tol: float = config.IMAG_RESIDUE_TOL,
                     agreement_tol: float = 1e-12) -> JointQuasiDistribution:
    """``D(i,j) = 1/2 Tr[E(rho - rho_i) Q_j]``.

    Also evaluated from expectation values as ``1/2 (<Q_j>_{E(rho)} - <Q_j>_{E(rho_i)})``;
    the two routes must agree to ``agreement_tol``.
    """
    rho = s.rho.matrix
    direct = np.empty((len(s.pvm_a), len(s.pvm_b)), dtype=complex)
    for i, p in enumerate(s.pvm_a.projectors):
        shifted = apply(s.channel, rho - lueders_update(rho, p))
        for j, q in enumerate(s.pvm_b.projectors):
            direct[i, j] = 0.5 * np.trace(shifted @ q)
    measurable = disturbance_measurable(s)
    gap = float(np.max(np.abs(direct - measurable)))
    if gap > agreement_tol:
        raise ArithmeticError(f"disturbance routes disagree by {gap:.3e}")
    return _table(s, Kind.DISTURBANCE, _real(direct, imag_tol))


def disturbance_measurable(s: TPSMScenario) -> np.ndarray:
    """``1/2 (<Q_j>_{E(rho)} - <Q_j>_{E(rho_i)})`` as a raw complex table."""
    rho = s.rho.matrix
    e_rho = apply(s.channel, rho)
    out = np.empty((len(s.pvm_a), len(s.pvm_b)), dtype=complex)
    for i, p in enumerate(s.pvm_a.projectors):
        e_rho_i = apply(s.channel, lueders_update(rho, p))
        for j, q in enumerate(s.pvm_b.projectors):
            out[i, j] = 0.5 * (_expectation(e_rho, q) - _expectation(e_rho_i, q))
    return out


def born_evaluate(s: TPSMScenario, varrho: StateOverTime | None = None,
                  imag_tol: float = config.IMAG_RESIDUE_TOL) -> JointQuasiDistribution:
    """``Tr[varrho (P_i (x) Q_j)]``; ``varrho`` defaults to the scenario's state over time."""
    if varrho is None:
        varrho = state_over_time(s.rho, s.channel)
    m = varrho.matrix
    if (varrho.idx.dim_a, varrho.idx.dim_b) != (s.pvm_a.dim, s.pvm_b.dim):
        raise DimensionMismatch(
            f"operator lives on {varrho.idx.dim_a}x{varrho.idx.dim_b}, scenario on "
            f"{s.pvm_a.dim}x{s.pvm_b.dim}")
    vals = np.empty((len(s.pvm_a), len(s.pvm_b)), dtype=complex)
    for i, p in enumerate(s.pvm_a.projectors):
        for j, q in enumerate(s.pvm_b.projectors):
            # Tr[M X] = sum(M * X^T) avoids the full product
            vals[i, j] = np.sum(m * np.kron(p, q).T)
    return _table(s, Kind.BORN, _real(vals, imag_tol))


# -- coarse graining ------------------------------------------------------------------------------

def _resolve_partition(labels: Sequence[str], merge) -> list[list[int]]:
    groups = []
    seen = set()
    for group in merge:
        idxs = []
        for item in group:
            key = str(item)
            if key not in labels:
                raise InvalidPartition(f"unknown outcome label {item!r}")
            k = labels.index(key)
            if k in seen:
                raise InvalidPartition(f"outcome {item!r} appears twice")
            seen.add(k)
            idxs.append(k)
        if not idxs:
            raise InvalidPartition("empty group in partition")
        groups.append(idxs)
    if len(seen) != len(labels):
        missing = [labels[k] for k in range(len(labels)) if k not in seen]
        raise InvalidPartition(f"partition misses outcomes {missing}")
    return groups


def _group_label(labels, idxs) -> str:
    return "+".join(labels[k] for k in idxs)


def coarse_grain(d: JointQuasiDistribution, merge) -> JointQuasiDistribution:
    """Sum rows over the groups of ``merge`` (a partition of row labels)."""
    groups = _resolve_partition(list(d.row_labels), merge)
    vals = np.array([d.values[g].sum(axis=0) for g in groups])
    labels = tuple(_group_label(d.row_labels, g) for g in groups)
    return JointQuasiDistribution(vals, labels, d.col_labels, d.kind,
                                  row_groups=tuple(tuple(d.row_labels[k] for k in g) for g in groups))


def coarse_grain_scenario(s: TPSMScenario, merge) -> TPSMScenario:
    """Replace ``{P_i}`` by the coarser PVM whose projectors are the group sums."""
    labels = list(s.pvm_a.labels)
    groups = _resolve_partition(labels, merge)
    ps = [sum(s.pvm_a.projectors[k] for k in g) for g in groups]
    pvm = ProjectiveMeasurement(ps, [_group_label(labels, g) for g in groups])
    return TPSMScenario(s.rho, pvm, s.channel, s.pvm_b)


_BY_KIND = {
    Kind.LVN: lvn_distribution,
    Kind.MH: mh_distribution,
    Kind.DISTURBANCE: disturbance_term,
    Kind.BORN: born_evaluate,
}


@dataclass(frozen=True)
class CoarseGrainComparison:
    merged_table: JointQuasiDistribution       # coarse_grain(dist(s))
    table_of_merged: JointQuasiDistribution    # dist(coarse_grain_scenario(s))

    @property
    def violation(self) -> float:
        return float(np.max(np.abs(self.merged_table.values - self.table_of_merged.values)))


def compare_coarse_graining(s: TPSMScenario, merge, kind: Kind = Kind.MH) -> CoarseGrainComparison:
    dist = _BY_KIND[Kind(kind)]
    return CoarseGrainComparison(coarse_grain(dist(s), merge), dist(coarse_grain_scenario(s, merge)))


# -- two-time expectation -------------------------------------------------------------------------

def two_time_expectation(s: TPSMScenario, ob) -> float:
    """``Tr[E(P_1 rho P_1) O_B] - Tr[E(P_2 rho P_2) O_B]`` for a binary ``pvm_a``.

    This is the sequential expectation of ``O_A = P_1 - P_2`` followed by ``O_B``.
    """
    if len(s.pvm_a) != 2:
        raise InvalidMeasurement(f"two-time expectation needs a binary pvm_a, got {len(s.pvm_a)} outcomes")
    ob = np.asarray(ob, dtype=complex)
    if ob.shape != (s.channel.dim_out,) * 2:
        raise DimensionMismatch(f"observable must be {s.channel.dim_out}x{s.channel.dim_out}")
    p1, p2 = s.pvm_a.projectors
    rho = s.rho.matrix
    val = np.trace(apply(s.channel, p1 @ rho @ p1) @ ob) - np.trace(apply(s.channel, p2 @ rho @ p2) @ ob)
    return float(_real(np.atleast_1d(val), config.IMAG_RESIDUE_TOL)[0])
