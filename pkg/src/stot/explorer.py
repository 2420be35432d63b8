"""Tomographic reconstruction and bounded numerical searches.

Nothing here certifies a universal statement. Reconstruction inverts the
pairing ``Q = Tr[varrho (F (x) G)]`` over a finite spanning frame of
projectors, and the searches return the best witness found within a budget.
"""

from dataclasses import dataclass, field
import enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .channels import (
    DensityOperator,
    ProjectiveMeasurement,
    QuantumChannel,
    _rng,
    apply,
    haar_isometry,
    is_discard_and_prepare,
)
from .distributions import TPSMScenario, disturbance_term, lueders_update, lvn_distribution, mh_distribution
from .errors import IllConditionedFrame
from .operators import BipartiteIndex, projector

EXISTENCE_TOL = 1e-8


# -- tomography -----------------------------------------------------------------------------------

def standard_frame(dim: int) -> list[np.ndarray]:
    """``dim**2`` rank-1 projectors onto ``|k>``, ``(|k>+|l>)/sqrt2``, ``(|k>+i|l>)/sqrt2`` (k < l)."""
    if dim < 2:
        raise ValueError(f"frame needs dim >= 2, got {dim}")
    eye = np.eye(dim, dtype=complex)
    frame = [projector(eye[k]) for k in range(dim)]
    for k in range(dim):
        for l in range(k + 1, dim):
            frame.append(projector(eye[k] + eye[l]))
            frame.append(projector(eye[k] + 1j * eye[l]))
    return frame


def design_matrix(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Rows ``vec(X^T)`` so that ``design @ vec(M) = [Tr[M X] for X in ops]``."""
    return np.stack([np.asarray(x).T.reshape(-1) for x in ops])


@dataclass(frozen=True)
class TomographicFrame:
    frame_a: tuple
    frame_b: tuple
    smallest_singular_value: float

    @classmethod
    def standard(cls, dim_a: int, dim_b: int) -> "TomographicFrame":
        fa, fb = standard_frame(dim_a), standard_frame(dim_b)
        # singular values of a Kronecker design are products of the factors'
        sa = np.linalg.svd(design_matrix(fa), compute_uv=False)
        sb = np.linalg.svd(design_matrix(fb), compute_uv=False)
        return cls(tuple(fa), tuple(fb), float(sa.min() * sb.min()))


@dataclass(frozen=True)
class TomographyResult:
    matrix: np.ndarray
    idx: BipartiteIndex
    residual: float
    smallest_singular_value: float
    data: np.ndarray = field(repr=False)


def mh_oracle(rho: DensityOperator, e: QuantumChannel) -> Callable[[np.ndarray, np.ndarray], float]:
    """``(F, G) -> Q(F, G)`` for the binary scenario ``(rho, {F, 1-F}, E, {G, 1-G})``."""
    def oracle(f, g):
        s = TPSMScenario(rho, ProjectiveMeasurement.binary(f), e, ProjectiveMeasurement.binary(g))
        return mh_distribution(s).values[0, 0]
    return oracle


def reconstruct_from_mh(oracle: Callable, dims: tuple[int, int], min_singular_value: float = 1e-3) -> TomographyResult:
    """Least-squares inversion of ``Tr[varrho (F_m (x) G_n)] = q_mn`` over standard frames."""
    da, db = dims
    frame = TomographicFrame.standard(da, db)
    if frame.smallest_singular_value < min_singular_value:
        raise IllConditionedFrame(
            f"frame design has smallest singular value {frame.smallest_singular_value:.3e}")
    ops, data = [], []
    for f in frame.frame_a:
        for g in frame.frame_b:
            ops.append(np.kron(f, g))
            data.append(float(oracle(f, g)))
    a = design_matrix(ops)
    q = np.array(data)
    x, *_ = np.linalg.lstsq(a, q.astype(complex), rcond=None)
    m = x.reshape(da * db, da * db)
    m = (m + m.conj().T) / 2
    residual = float(np.linalg.norm(a @ m.reshape(-1) - q))
    return TomographyResult(m, BipartiteIndex(da, db), residual, frame.smallest_singular_value, q)


# -- projector search -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    """Search effort: random projector samples, optimizer iterations per start, number of starts."""

    samples: int = 64
    iterations: int = 100
    restarts: int = 3
    seed: int = 0

    @classmethod
    def frame_only(cls) -> "Budget":
        return cls(samples=0, iterations=0, restarts=0)

    @classmethod
    def from_size(cls, n: int, seed: int = 0) -> "Budget":
        """A single-number budget: ``n`` samples, ``n`` iterations, ``ceil(n/250)`` starts."""
        if n <= 0:
            return cls(0, 0, 0, seed)
        return cls(samples=n, iterations=n, restarts=max(1, -(-n // 250)), seed=seed)


def _isometry_from_params(x: np.ndarray, dim: int, rank: int) -> np.ndarray:
    n = dim * rank
    z = (x[:n] + 1j * x[n:]).reshape(dim, rank)
    q, _ = np.linalg.qr(z)
    return q


def _candidates(dim: int, budget: Budget):
    """Frame projectors first, then seeded random projectors cycling through ranks 1..dim-1."""
    for f in standard_frame(dim):
        w, v = np.linalg.eigh(f)
        yield v[:, w > 0.5]
    if budget.samples <= 0:
        return
    rng = _rng(budget.seed)
    for n in range(budget.samples):
        rank = 1 + n % (dim - 1)
        yield haar_isometry(dim, rank, rng)


def _search(objective: Callable[[np.ndarray], float], dim: int, budget: Budget):
    """Maximize ``objective(P)`` over projectors; returns ``(value, P, evaluations)``.

    Local optimization starts from the ``restarts`` best frame projectors and
    the first ``restarts`` random samples. Neither choice depends on how many
    samples are drawn, so a larger budget runs a superset of the trials of a
    smaller one and never does worse. Ties and sub-1e-12 improvements keep the
    earlier trial.
    """
    pool = [(objective(v @ v.conj().T), v) for v in _candidates(dim, budget)]
    n_frame = dim * dim
    best_val, best_v = pool[0]
    for val, v in pool[1:]:
        if val > best_val + 1e-12:
            best_val, best_v = val, v
    evaluations = len(pool)
    if budget.iterations > 0:
        ranked = sorted(range(n_frame), key=lambda k: (-pool[k][0], k))[:budget.restarts]
        starts = ranked + list(range(n_frame, min(len(pool), n_frame + budget.restarts)))
        for k in starts:
            v0 = pool[k][1]
            rank = v0.shape[1]
            x0 = np.concatenate([v0.real.ravel(), v0.imag.ravel()])

            def neg(x, rank=rank):
                q = _isometry_from_params(x, dim, rank)
                return -objective(q @ q.conj().T)

            res = minimize(neg, x0, method="L-BFGS-B", options={"maxiter": budget.iterations})
            evaluations += int(res.nfev)
            val = -float(res.fun)
            if val > best_val + 1e-12:
                best_val, best_v = val, _isometry_from_params(res.x, dim, rank)
    best_p = best_v @ best_v.conj().T
    return objective(best_p), best_p, evaluations


def disturbance_operator(rho: DensityOperator, e: QuantumChannel, p) -> np.ndarray:
    """``E(rho - rho_P)``: twice the operator whose pairing with ``Q_j`` gives ``D``."""
    return apply(e, rho.matrix - lueders_update(rho.matrix, p))


def _best_effect(delta: np.ndarray) -> ProjectiveMeasurement:
    """Binary PVM whose first projector spans the positive eigenspace of ``delta``."""
    w, v = np.linalg.eigh(delta)
    pos = v[:, w > 1e-14]
    dim = delta.shape[0]
    if pos.shape[1] in (0, dim):
        return ProjectiveMeasurement.computational(dim)
    return ProjectiveMeasurement.binary(pos @ pos.conj().T, ["+", "-"])


class Verdict(str, enum.Enum):
    EXISTS_WITHIN_TOLERANCE = "ExistsWithinTolerance"
    FAILS_WITH_WITNESS = "FailsWithWitness"


@dataclass(frozen=True)
class Witness:
    scenario: TPSMScenario
    i: int
    j: int
    lvn_mh_gap: float       # max |P - Q| on the witness scenario


@dataclass(frozen=True)
class BornExistenceReport:
    max_violation: float
    verdict: Verdict
    witness: Witness | None
    maximally_mixed: bool
    discard_and_prepare: bool
    evaluations: int

    @property
    def sufficient_condition_hits(self) -> dict:
        return {"maximally_mixed": self.maximally_mixed, "discard_and_prepare": self.discard_and_prepare}

    def to_dict(self) -> dict:
        from .serialize import scenario_to_json

        out = {
            "verdict": self.verdict.value,
            "max_violation": self.max_violation,
            "sufficient_condition_hits": self.sufficient_condition_hits,
            "evaluations": self.evaluations,
        }
        if self.witness is not None:
            out["witness"] = {
                "i": self.witness.i,
                "j": self.witness.j,
                "lvn_mh_gap": self.witness.lvn_mh_gap,
                "scenario": scenario_to_json(self.witness.scenario),
            }
        return out


def is_maximally_mixed(rho: DensityOperator, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(rho.matrix - np.eye(rho.dim) / rho.dim))) <= tol


def born_existence_check(rho: DensityOperator, e: QuantumChannel, budget: Budget = Budget(),
                         tol: float = EXISTENCE_TOL) -> BornExistenceReport:
    """Search for a projector ``P`` with ``||E(rho - rho_P)||_F > tol``.

    A hit is a constructive obstruction: the returned witness scenario has
    ``P != Q`` somewhere. No hit only means none was found within ``budget``.
    """
    def violation(p):
        return float(np.linalg.norm(disturbance_operator(rho, e, p)))

    value, p, evaluations = _search(violation, rho.dim, budget)
    witness = None
    verdict = Verdict.EXISTS_WITHIN_TOLERANCE
    if value > tol:
        verdict = Verdict.FAILS_WITH_WITNESS
        s = TPSMScenario(rho, ProjectiveMeasurement.binary(p), e,
                         _best_effect(disturbance_operator(rho, e, p)))
        gap = np.abs(mh_distribution(s).values - lvn_distribution(s).values)
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        witness = Witness(s, int(i), int(j), float(gap.max()))
    return BornExistenceReport(value, verdict, witness, is_maximally_mixed(rho),
                               is_discard_and_prepare(e), evaluations)


@dataclass(frozen=True)
class DisturbanceSearchResult:
    scenario: TPSMScenario
    value: float
    evaluations: int


def search_max_disturbance(rho: DensityOperator, e: QuantumChannel,
                           budget: Budget = Budget()) -> DisturbanceSearchResult:
    """Maximize ``max_ij |D(i,j)|`` over binary first measurements.

    For fixed ``P`` the best second measurement projects onto the positive part
    of ``E(rho - rho_P)``, giving ``|D| = ||E(rho - rho_P)||_1 / 4``; that closed
    form is the search objective. ``D`` depends on ``{P_i}`` only through each
    ``P_i``, so binary first measurements lose nothing.
    """
    def objective(p):
        return float(np.abs(np.linalg.eigvalsh(disturbance_operator(rho, e, p))).sum()) / 4

    _, p, evaluations = _search(objective, rho.dim, budget)
    s = TPSMScenario(rho, ProjectiveMeasurement.binary(p), e, _best_effect(disturbance_operator(rho, e, p)))
    value = float(np.max(np.abs(disturbance_term(s).values)))
    return DisturbanceSearchResult(s, value, evaluations)


# -- qubit scan -----------------------------------------------------------------------------------

def bloch_state(r) -> DensityOperator:
    x, y, z = r
    return DensityOperator(np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]) / 2)


def bloch_grid(radii: Sequence[float] = (0.0, 0.5, 1.0), directions: int = 6) -> list[tuple[str, DensityOperator]]:
    """Qubit states on spheres of the given radii, directions from a Fibonacci lattice."""
    golden = np.pi * (3 - np.sqrt(5))
    dirs = []
    for k in range(directions):
        z = 1 - 2 * (k + 0.5) / directions
        r = np.sqrt(1 - z * z)
        dirs.append((r * np.cos(golden * k), r * np.sin(golden * k), z))
    grid = []
    for radius in radii:
        if radius == 0:
            grid.append(("r=0", bloch_state((0, 0, 0))))
            continue
        for k, d in enumerate(dirs):
            grid.append((f"r={radius:g}/d{k}", bloch_state(np.asarray(d) * radius)))
    return grid


@dataclass(frozen=True)
class ScanEntry:
    state: str
    channel: str
    max_violation: float
    passes: bool
    maximally_mixed: bool
    discard_and_prepare: bool

    @property
    def anomalous(self) -> bool:
        return self.passes and not (self.maximally_mixed or self.discard_and_prepare)


@dataclass(frozen=True)
class ScanReport:
    entries: tuple
    tol: float

    @property
    def passing(self) -> list:
        return [x for x in self.entries if x.passes]

    @property
    def anomalies(self) -> list:
        return [x for x in self.entries if x.anomalous]

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "anomalies": [[x.state, x.channel] for x in self.anomalies],
            "passing": [
                {"state": x.state, "channel": x.channel, "max_violation": x.max_violation,
                 "maximally_mixed": x.maximally_mixed, "discard_and_prepare": x.discard_and_prepare}
                for x in self.passing
            ],
            "scanned": len(self.entries),
        }


def qubit_necessity_scan(states: Sequence[tuple[str, DensityOperator]],
                         channels: Sequence[tuple[str, QuantumChannel]],
                         tol: float = EXISTENCE_TOL, budget: Budget = Budget(samples=16, iterations=60, restarts=2)) -> ScanReport:
    """Run the Born-existence search on every qubit ``(rho, E)`` pair.

    Pairs that pass without being maximally mixed or discard-and-prepare are
    flagged as anomalies. An empty anomaly list is evidence, not proof.
    """
    entries = []
    for sl, rho in states:
        if rho.dim != 2:
            raise ValueError(f"state {sl!r} is not a qubit")
        for cl, e in channels:
            rep = born_existence_check(rho, e, budget, tol)
            entries.append(ScanEntry(sl, cl, rep.max_violation, rep.max_violation <= tol,
                                     rep.maximally_mixed, rep.discard_and_prepare))
    return ScanReport(tuple(entries), tol)
