"""States, projective measurements and CPTP channels.

Two bipartite channel representations are kept side by side, both in the
computational basis of the input space:

* the Jamiolkowski operator ``J = sum_ij |i><j| (x) E(|j><i|)``, which satisfies
  ``Tr[J (a (x) b)] = Tr[E(a) b]`` and is what enters the state over time;
* the Choi operator ``C = sum_ij |i><j| (x) E(|i><j|)``, which is PSD iff the map
  is completely positive. ``C`` is the partial transpose of ``J`` on the input factor.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .errors import (
    DimensionMismatch,
    InvalidMeasurement,
    NotCompletelyPositive,
    NotNormalized,
    NotPositive,
    NotTracePreserving,
)
from .operators import (
    BipartiteIndex,
    as_matrix,
    frozen,
    hermitian,
    matrix_unit,
    partial_trace,
    partial_transpose,
    projector,
)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class DensityOperator:
    """A PSD, unit-trace Hermitian matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, psd_tol: float = config.PSD_TOL, trace_tol: float = config.TRACE_TOL):
        m = hermitian(matrix)
        tr = np.trace(m).real
        if abs(tr - 1.0) > trace_tol:
            raise NotNormalized(f"density operator trace is {tr!r}, expected 1")
        w = np.linalg.eigvalsh(m)
        if w[0] < -psd_tol:
            raise NotPositive(float(w[0]), psd_tol)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    @classmethod
    def pure(cls, vec) -> "DensityOperator":
        return cls(projector(vec))

    @classmethod
    def diagonal(cls, probs) -> "DensityOperator":
        return cls(np.diag(np.asarray(probs, dtype=float)))

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


class ProjectiveMeasurement:
    """An ordered family of orthogonal projectors resolving the identity.

    Projectors may have any rank >= 1. Labels default to ``"0", "1", ...``.
    """

    __slots__ = ("projectors", "labels")

    def __init__(self, projectors: Sequence, labels: Sequence[str] | None = None,
                 tol: float = config.MEASUREMENT_TOL):
        ps = [hermitian(p, tol) for p in projectors]
        if not ps:
            raise InvalidMeasurement("a projective measurement needs at least one projector")
        dim = ps[0].shape[0]
        if any(p.shape != (dim, dim) for p in ps):
            raise InvalidMeasurement("projectors have inconsistent dimensions")
        for i, p in enumerate(ps):
            if np.trace(p).real < 0.5:
                raise InvalidMeasurement(f"projector {i} is zero")
            for j in range(i, len(ps)):
                target = p if i == j else 0.0
                err = float(np.max(np.abs(p @ ps[j] - target)))
                if err > tol:
                    raise InvalidMeasurement(f"P_{i} P_{j} deviates from delta_ij P_i by {err:.3e}")
        err = float(np.max(np.abs(sum(ps) - np.eye(dim))))
        if err > tol:
            raise InvalidMeasurement(f"projectors sum to identity only up to {err:.3e}")
        if labels is None:
            labels = [str(i) for i in range(len(ps))]
        labels = [str(x) for x in labels]
        if len(labels) != len(ps) or len(set(labels)) != len(labels):
            raise InvalidMeasurement("labels must be unique and match the number of projectors")
        object.__setattr__(self, "projectors", tuple(ps))
        object.__setattr__(self, "labels", tuple(labels))

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveMeasurement is immutable")

    def __len__(self):
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        return cls([matrix_unit(i, i, dim) for i in range(dim)])

    @classmethod
    def from_basis(cls, basis, groups: Sequence[Sequence[int]] | None = None,
                   labels=None) -> "ProjectiveMeasurement":
        """Group the columns of a unitary ``basis`` into projectors (one per column by default)."""
        u = np.asarray(basis, dtype=complex)
        if groups is None:
            groups = [[k] for k in range(u.shape[1])]
        ps = [u[:, list(g)] @ u[:, list(g)].conj().T for g in groups]
        return cls(ps, labels)

    @classmethod
    def binary(cls, p, labels=None) -> "ProjectiveMeasurement":
        """Complete a single projector ``p`` to the PVM ``{p, 1 - p}``."""
        p = np.asarray(p, dtype=complex)
        return cls([p, np.eye(p.shape[0]) - p], labels)

    def observable(self, values: Sequence[float]) -> np.ndarray:
        return sum(v * p for v, p in zip(values, self.projectors))

    def __repr__(self):
        return f"ProjectiveMeasurement(dim={self.dim}, labels={list(self.labels)})"


@dataclass(frozen=True)
class JamiolkowskiOperator:
    idx: BipartiteIndex
    matrix: np.ndarray


class QuantumChannel:
    """A CPTP map given by Kraus operators of shape ``(dim_out, dim_in)``.

    Choi and Jamiolkowski operators are computed at construction, so an
    instance never mutates after ``__init__``.
    """

    __slots__ = ("kraus", "dim_in", "dim_out", "choi", "jamiolkowski")

    def __init__(self, kraus: Sequence, tp_tol: float = config.TP_TOL, cp_tol: float = config.CP_TOL):
        ks = [as_matrix(k, square=False) for k in kraus]
        if not ks:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise DimensionMismatch("Kraus operators have inconsistent shapes")
        dim_out, dim_in = shape
        tp = sum(k.conj().T @ k for k in ks)
        residual = float(np.max(np.abs(tp - np.eye(dim_in))))
        if residual > tp_tol:
            raise NotTracePreserving(residual, tp_tol)
        set_ = object.__setattr__
        set_(self, "kraus", tuple(frozen(k) for k in ks))
        set_(self, "dim_in", dim_in)
        set_(self, "dim_out", dim_out)
        c = _choi_from_kraus(ks)
        w = np.linalg.eigvalsh(c)
        if w[0] < -cp_tol:
            raise NotCompletelyPositive(float(w[0]), cp_tol)
        set_(self, "choi", frozen(c))
        set_(self, "jamiolkowski", JamiolkowskiOperator(
            BipartiteIndex(dim_in, dim_out), frozen(_jamiolkowski_by_definition(self))))

    def __setattr__(self, name, value):
        raise AttributeError("QuantumChannel is immutable")

    @property
    def idx(self) -> BipartiteIndex:
        return BipartiteIndex(self.dim_in, self.dim_out)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def __repr__(self):
        return f"QuantumChannel({self.dim_in}->{self.dim_out}, kraus_rank={len(self.kraus)})"


def _choi_from_kraus(ks) -> np.ndarray:
    # column k: sum_i |i> (x) K_k|i>, entry i*dim_out + o = K_k[o, i]
    v = np.stack([k.T.reshape(-1) for k in ks], axis=1)
    c = v @ v.conj().T
    return (c + c.conj().T) / 2


def _jamiolkowski_by_definition(e: QuantumChannel) -> np.ndarray:
    d = e.dim_in
    j = np.zeros((d * e.dim_out, d * e.dim_out), dtype=complex)
    for a in range(d):
        for b in range(d):
            # |a><b| (x) E(|b><a|)
            j[a * e.dim_out:(a + 1) * e.dim_out, b * e.dim_out:(b + 1) * e.dim_out] = apply(
                e, matrix_unit(b, a, d))
    return j


def apply(e: QuantumChannel, x) -> np.ndarray:
    """``sum_k K_k x K_k^dag``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (e.dim_in, e.dim_in):
        raise DimensionMismatch(f"channel input is {e.dim_in}x{e.dim_in}, got {x.shape}")
    return sum(k @ x @ k.conj().T for k in e.kraus)


def adjoint_apply(e: QuantumChannel, y) -> np.ndarray:
    """Hilbert-Schmidt adjoint ``sum_k K_k^dag y K_k``."""
    y = np.asarray(y, dtype=complex)
    if y.shape != (e.dim_out, e.dim_out):
        raise DimensionMismatch(f"adjoint input is {e.dim_out}x{e.dim_out}, got {y.shape}")
    return sum(k.conj().T @ y @ k for k in e.kraus)


def apply_state(e: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    # loosened tolerances absorb rounding from the Kraus sum
    return DensityOperator(apply(e, rho.matrix), psd_tol=1e-10, trace_tol=1e-10)


def jamiolkowski(e: QuantumChannel) -> JamiolkowskiOperator:
    return e.jamiolkowski


def choi(e: QuantumChannel) -> np.ndarray:
    return e.choi


def channel_from_choi(c, idx: BipartiteIndex, cp_tol: float = config.CP_TOL,
                      tp_tol: float = config.TP_TOL) -> QuantumChannel:
    """Rebuild a channel from its Choi operator on ``H_in (x) H_out``.

    Kraus operators come from the eigendecomposition ``C = sum mu v v^dag``;
    eigenvalues at or below ``KRAUS_RANK_TOL`` are dropped.
    """
    c = as_matrix(c)
    idx.check(c)
    c = np.asarray(hermitian(c, max(cp_tol, config.HERMITICITY_TOL)))
    tp = partial_trace(c, idx, "B")
    residual = float(np.max(np.abs(tp - np.eye(idx.dim_a))))
    if residual > tp_tol:
        raise NotTracePreserving(residual, tp_tol)
    w, v = np.linalg.eigh(c)
    if w[0] < -cp_tol:
        raise NotCompletelyPositive(float(w[0]), cp_tol)
    keep = w > config.KRAUS_RANK_TOL
    kraus = [np.sqrt(mu) * v[:, n].reshape(idx.dim_a, idx.dim_b).T
             for mu, n in zip(w[keep], np.flatnonzero(keep))]
    return QuantumChannel(kraus, tp_tol=max(tp_tol, config.TP_TOL), cp_tol=max(cp_tol, config.CP_TOL))


def channel_from_jamiolkowski(j, idx: BipartiteIndex | None = None, cp_tol: float = config.CP_TOL,
                              tp_tol: float = config.TP_TOL) -> QuantumChannel:
    if isinstance(j, JamiolkowskiOperator):
        idx, j = j.idx, j.matrix
    if idx is None:
        raise DimensionMismatch("a raw Jamiolkowski matrix needs a BipartiteIndex")
    return channel_from_choi(partial_transpose(j, idx, "A"), idx, cp_tol=cp_tol, tp_tol=tp_tol)


def same_map(e: QuantumChannel, f: QuantumChannel) -> float:
    """Largest entrywise disagreement of two channels over all matrix units."""
    if (e.dim_in, e.dim_out) != (f.dim_in, f.dim_out):
        raise DimensionMismatch(f"{e!r} and {f!r} have different dimensions")
    d = e.dim_in
    return max(float(np.max(np.abs(apply(e, matrix_unit(a, b, d)) - apply(f, matrix_unit(a, b, d)))))
               for a in range(d) for b in range(d))


# -- named constructors ---------------------------------------------------------------------------

def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel([np.eye(dim)])


def unitary_channel(u) -> QuantumChannel:
    u = as_matrix(u)
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > config.TP_TOL:
        raise NotTracePreserving(err, config.TP_TOL)
    return QuantumChannel([u])


def discard_and_prepare(sigma, dim_in: int) -> QuantumChannel:
    """The constant channel ``a -> Tr[a] sigma``."""
    s = sigma.matrix if isinstance(sigma, DensityOperator) else DensityOperator(sigma).matrix
    w, v = np.linalg.eigh(s)
    kraus = []
    for mu, n in zip(w, range(len(w))):
        if mu <= config.KRAUS_RANK_TOL:
            continue
        for i in range(dim_in):
            # sqrt(mu) |v_n><i|
            kraus.append(np.sqrt(mu) * np.outer(v[:, n], np.eye(dim_in)[i]))
    return QuantumChannel(kraus)


def depolarizing_channel(dim: int, p: float) -> QuantumChannel:
    """``a -> (1-p) a + p Tr[a] 1/d`` for ``0 <= p <= 1``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    kraus = [np.sqrt(1 - p) * np.eye(dim)] if p < 1 else []
    for a in range(dim):
        for b in range(dim):
            kraus.append(np.sqrt(p / dim) * matrix_unit(a, b, dim))
    return QuantumChannel(kraus)


def amplitude_damping(gamma: float) -> QuantumChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping parameter must lie in [0, 1], got {gamma}")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return QuantumChannel([k0, k1])


def _embedding(dim_small: int, dim_big: int) -> np.ndarray:
    v = np.zeros((dim_big, dim_small), dtype=complex)
    v[:dim_small, :dim_small] = np.eye(dim_small)
    return v


def erasure_channel(lam: float) -> QuantumChannel:
    """Qubit erasure ``w -> (1-lam) w + lam Tr[w] |2><2|`` into a qutrit, ``0 < lam < 1``.

    The qubit space is identified with ``span{|0>, |1>}`` inside the qutrit.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"erasure probability must lie in (0, 1), got {lam}")
    v = _embedding(2, 3)
    flag0 = np.zeros((3, 2), dtype=complex)
    flag0[2, 0] = 1.0
    flag1 = np.zeros((3, 2), dtype=complex)
    flag1[2, 1] = 1.0
    return QuantumChannel([np.sqrt(1 - lam) * v, np.sqrt(lam) * flag0, np.sqrt(lam) * flag1])


def erasure_bayesian_inverse(lam: float, p: float) -> QuantumChannel:
    """Recovery map for the erasure channel at input ``rho = diag(p, 1-p)``.

    Identity on the embedded qubit block, ``|2><2| -> rho``, and the coherences
    ``|i><2|``, ``|2><i|`` are sent to zero.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"erasure probability must lie in (0, 1), got {lam}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"population p must lie in [0, 1], got {p}")
    kraus = [_embedding(2, 3).conj().T]
    for i, w in enumerate((p, 1 - p)):
        if w > 0:
            k = np.zeros((2, 3), dtype=complex)
            k[i, 2] = np.sqrt(w)
            kraus.append(k)
    return QuantumChannel(kraus)


def is_discard_and_prepare(e: QuantumChannel, tol: float = 1e-10) -> bool:
    sigma = apply(e, np.eye(e.dim_in) / e.dim_in)
    return float(np.max(np.abs(e.jamiolkowski.matrix - np.kron(np.eye(e.dim_in), sigma)))) <= tol


# -- random instances -----------------------------------------------------------------------------

def haar_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    """Haar-distributed isometry ``V`` (``V^dag V = 1``) of shape ``(rows, cols)``."""
    if rows < cols:
        raise ValueError(f"no isometry from dimension {cols} into {rows}")
    rng = _rng(seed)
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def haar_unitary(dim: int, seed=None) -> np.ndarray:
    return haar_isometry(dim, dim, seed)


def random_channel(dim_in: int, dim_out: int, kraus_rank: int, seed=None) -> QuantumChannel:
    """Random channel from a Haar isometry Stinespring dilation ``H_in -> H_out (x) H_env``."""
    if kraus_rank < 1 or dim_in < 1 or dim_out < 1:
        raise ValueError("dimensions and Kraus rank must be positive")
    if dim_out * kraus_rank < dim_in:
        raise ValueError(f"kraus_rank {kraus_rank} too small for a {dim_in}->{dim_out} channel")
    v = haar_isometry(kraus_rank * dim_out, dim_in, seed)
    return QuantumChannel([v[k * dim_out:(k + 1) * dim_out, :] for k in range(kraus_rank)])


def random_state(dim: int, rank: int | None = None, seed=None) -> DensityOperator:
    """Normalized Wishart state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    w = g @ g.conj().T
    return DensityOperator(w / np.trace(w).real)


def random_pvm(dim: int, num_outcomes: int, seed=None) -> ProjectiveMeasurement:
    """Columns of a Haar unitary split into ``num_outcomes`` contiguous, near-equal groups."""
    if not 1 <= num_outcomes <= dim:
        raise ValueError(f"num_outcomes must lie in [1, {dim}], got {num_outcomes}")
    u = haar_unitary(dim, seed)
    groups = [list(g) for g in np.array_split(np.arange(dim), num_outcomes)]
    return ProjectiveMeasurement.from_basis(u, groups)
