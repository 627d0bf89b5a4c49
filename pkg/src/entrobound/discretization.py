"""Sampling discretization on finite measure spaces.

A subspace of functions on finitely many weighted points is given by a
basis that is orthonormal in the weighted inner product.  This module
computes its reproducing kernel, the uniform-norm constant

    M_p = sup { ||f||_inf / ||f||_{L_p(mu)} : f in the subspace }

by two independent routes (direct maximization per point, and the dual
distance-to-complement problem whose agreement is the classical
duality test), builds the pointwise-evaluation dictionary w_j / g_j
for a chosen set of sample points, and verifies the resulting transfer
inequality  max_j |f(x^j)| <= 2 M_p max_j |<f, g_j>|  on random
subspace elements.  ``it1_experiment`` chains everything into an
entropy profile of the unit L_p ball of the subspace measured in the
max-over-sample-points seminorm, compared against the
(log(2n/k)/k)^(1/p) envelope.

Both inner problems are convex for p in [2, inf): the direct problem
minimizes a p-th power over an affine slice of coefficients, the dual
one a p'-th power over the orthogonal complement (p' in (1, 2]).  Both
use the shared smoothed-Newton solver; p = 2 short-circuits to closed
forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space

from ._optim import minimize_power_residual
from .entropy import (
    EntropyProfile,
    PointwiseMaxMetric,
    _fps,
    log_ratio_envelope,
    octahedron_cover_profile,
)
from .errors import (
    CertificateError,
    DimensionMismatchError,
    GramDefectError,
    NormBoundError,
    PropertyViolationError,
)
from .greedy import Octahedron
from .spaces import Dictionary, discrete_space

__all__ = [
    "MeasureSpace",
    "Subspace",
    "SamplePointSet",
    "DiscretizationDictionary",
    "dirichlet_kernel",
    "m_p_direct",
    "m_p_dual",
    "build_discretization_dictionary",
    "verify_transfer",
    "TransferReport",
    "it1_experiment",
    "SubspaceEntropyResult",
    "random_subspace",
]

_GRAM_TOL = 1e-10


def _validate_p(p: float) -> None:
    if not p >= 2:
        raise ValueError(f"the exponent must satisfy p >= 2, got {p}")


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Finitely many points with positive weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty vector")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, size: int) -> "MeasureSpace":
        return cls(np.full(size, 1.0 / size))

    def norm(self, values: np.ndarray, p: float) -> float:
        values = np.asarray(values, dtype=float)
        if np.isinf(p):
            return float(np.abs(values).max())
        peak = np.abs(values).max()
        if peak == 0.0:
            return 0.0
        return float(peak * (self.weights @ np.abs(values / peak) ** p) ** (1.0 / p))

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float((self.weights * np.asarray(a)) @ np.asarray(b))

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "MeasureSpace":
        return cls(np.asarray(doc["weights"], dtype=float))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column-orthonormal basis of functions on a weighted point set.

    ``basis`` has one row per support point and one column per basis
    function; orthonormality is checked in the weighted inner product
    at construction time.
    """

    measure: MeasureSpace
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        object.__setattr__(self, "basis", basis)
        if basis.ndim != 2:
            raise ValueError("basis must be a matrix (points x functions)")
        if basis.shape[0] != self.measure.size:
            raise DimensionMismatchError(self.measure.size, basis.shape[0],
                                         "basis rows")
        if not 1 <= basis.shape[1] <= basis.shape[0]:
            raise ValueError(
                f"need between 1 and {basis.shape[0]} basis functions, "
                f"got {basis.shape[1]}")
        gram = basis.T @ (self.measure.weights[:, None] * basis)
        defect = float(np.abs(gram - np.eye(self.dim)).max())
        if defect > _GRAM_TOL:
            raise GramDefectError(defect)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def support_size(self) -> int:
        return int(self.basis.shape[0])

    @cached_property
    def _kernel(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @cached_property
    def _complement(self) -> np.ndarray:
        # orthonormal basis of the complement in the half-weighted frame:
        # v is mu-orthogonal to the subspace iff sqrt(mu) v lies in
        # null((sqrt(mu) basis)^T)
        root = np.sqrt(self.measure.weights)
        return null_space((root[:, None] * self.basis).T)

    def evaluate(self, coefficients: np.ndarray) -> np.ndarray:
        return self.basis @ np.asarray(coefficients, dtype=float)

    def to_json(self) -> dict:
        return {"weights": self.measure.weights.tolist(),
                "basis_rows": self.basis.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "Subspace":
        return cls(MeasureSpace(np.asarray(doc["weights"], dtype=float)),
                   np.asarray(doc["basis_rows"], dtype=float))


@dataclass(frozen=True, eq=False)
class SamplePointSet:
    """Distinct support-point indices at which functions are sampled."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("need at least one sample point")
        if np.any(idx < 0):
            raise ValueError("indices must be nonnegative")
        if len(np.unique(idx)) != idx.size:
            raise ValueError("indices must be distinct")

    @property
    def count(self) -> int:
        return int(self.indices.size)

    def to_json(self) -> dict:
        return {"indices": self.indices.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "SamplePointSet":
        return cls(np.asarray(doc["indices"], dtype=int))


def dirichlet_kernel(sub: Subspace) -> np.ndarray:
    """Reproducing kernel table D(x, y) = sum_i u_i(x) u_i(y).

    Satisfies <f, D(x, .)>_mu = f(x) for subspace elements; the
    weighted trace equals the subspace dimension.
    """
    return sub._kernel.copy()


# ---------------------------------------------------------------------------
# the uniform-norm constant, two ways

def _direct_point_value(sub: Subspace, x: int, p: float,
                        tol: float) -> float:
    """max { f(x) : f in the subspace, ||f||_p <= 1 }."""
    a = sub.basis[x]
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return 0.0
    B = sub.basis
    mu = sub.measure.weights
    c0 = a / scale ** 2
    Z = null_space(a[None, :])
    if Z.shape[1] == 0:  # one-dimensional subspace
        return 1.0 / sub.measure.norm(B @ c0, p)
    # minimal ||f||_p^p over the slice f = B(c0 + Zy), via the residual form
    res = minimize_power_residual(B @ Z, -(B @ c0), mu, p, decrement_tol=tol)
    return float(res.value ** (-1.0 / p))


def m_p_direct(sub: Subspace, p: float, tol: float = 1e-9) -> float:
    """sup ||f||_inf / ||f||_p over the subspace, by direct maximization.

    Per support point, maximizing f(x) over the L_p ball is the smooth
    convex problem of minimizing ||f||_p^p over an affine coefficient
    slice; p = 2 collapses to the closed form sqrt(D(x, x)).
    """
    _validate_p(p)
    if p == 2:
        return float(np.sqrt((sub.basis ** 2).sum(axis=1).max()))
    return max(_direct_point_value(sub, x, p, tol)
               for x in range(sub.support_size))


def _dual_point_solve(sub: Subspace, x: int, p: float,
                      tol: float) -> tuple[float, np.ndarray]:
    """min over complement elements v of ||D(x,.) - v||_{p'}, with minimizer."""
    mu = sub.measure.weights
    Dx = sub._kernel[x]
    pp = p / (p - 1.0)
    K = sub._complement
    if K.shape[1] == 0:  # full space: the complement is {0}
        return sub.measure.norm(Dx, pp), np.zeros(sub.support_size)
    root = np.sqrt(mu)
    Kw = K / root[:, None]  # complement columns as functions
    res = minimize_power_residual(Kw, Dx, mu, pp, decrement_tol=tol)
    v = Kw @ res.x
    return float(res.value ** (1.0 / pp)), v


def m_p_dual(sub: Subspace, p: float, tol: float = 1e-9) -> float:
    """The same constant through the distance-to-complement problem.

    For each point, the norm of the evaluation functional equals the
    L_{p'} distance from the kernel section D(x, .) to the orthogonal
    complement of the subspace.  Agreement with ``m_p_direct`` is the
    duality cross-check.  p = 2 collapses to ||D(x, .)||_2, the Hilbert
    projection onto the complement being zero.
    """
    _validate_p(p)
    if p == 2:
        mu = sub.measure.weights
        K = sub._kernel
        return float(np.sqrt(((K ** 2) @ mu).max()))
    return max(_dual_point_solve(sub, x, p, tol)[0]
               for x in range(sub.support_size))


# ---------------------------------------------------------------------------
# the evaluation dictionary

@dataclass(frozen=True, eq=False)
class DiscretizationDictionary:
    """Evaluation vectors w_j and their normalizations g_j.

    w_j reproduces point evaluation on the subspace,
    <f, w_j>_mu = f(x^j), and ||w_j||_{p'} is certified to stay within
    twice the uniform-norm constant.  g_j = w_j / ||w_j||_{p'} are unit
    atoms in L_{p'}(mu).
    """

    subspace: Subspace
    points: SamplePointSet
    p: float
    w_vectors: np.ndarray       # one row per sample point
    w_norms: np.ndarray
    atoms: np.ndarray           # g_j as columns, support_size x n
    m_p: float

    @property
    def count(self) -> int:
        return self.points.count

    @property
    def dual_exponent(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def max_w_norm(self) -> float:
        return float(self.w_norms.max())

    def u_dictionary(self) -> Dictionary:
        """The g_j atoms as a dictionary in L_{p'}(mu)."""
        space = discrete_space(self.subspace.measure.weights,
                               self.dual_exponent)
        return Dictionary(self.atoms, space)

    def norm_u(self, values: np.ndarray) -> float:
        """max_j |<f, g_j>_mu| for a function given by its point values."""
        mu = self.subspace.measure.weights
        return float(np.abs((mu * np.asarray(values, dtype=float)) @ self.atoms).max())


def build_discretization_dictionary(sub: Subspace, pts: SamplePointSet,
                                    p: float, tol: float = 1e-6
                                    ) -> DiscretizationDictionary:
    """Assemble w_j = D(x^j, .) - v_j and g_j for the sample points.

    v_j is the near-minimizer from the dual inner problem at x^j (zero
    in the Hilbert case), so ||w_j||_{p'} equals the norm of the j-th
    evaluation functional up to solver slack; the factor-2 certificate
    absorbs that slack.  Both dictionary invariants are checked here:
    the reproducing identity on the basis to 1e-8, and the norm bound
    ||w_j||_{p'} <= 2 M_p + tol.
    """
    _validate_p(p)
    if np.any(pts.indices >= sub.support_size):
        raise ValueError(
            f"sample points must index the {sub.support_size} support points")
    mu = sub.measure.weights
    pp = p / (p - 1.0)
    m_p = m_p_dual(sub, p)

    w_rows, w_norms = [], []
    for j, x in enumerate(pts.indices):
        if p == 2:
            w = sub._kernel[x].copy()
            w_norm = sub.measure.norm(w, 2.0)
        else:
            w_norm, v = _dual_point_solve(sub, int(x), p, 1e-9)
            w = sub._kernel[x] - v
        if w_norm == 0.0:
            raise ValueError(
                f"every subspace element vanishes at sample point {x}; "
                "the evaluation functional is degenerate")
        bound = 2.0 * m_p + tol
        if w_norm > bound:
            raise NormBoundError(j, w_norm, bound)
        w_rows.append(w)
        w_norms.append(w_norm)

    w_vectors = np.stack(w_rows)
    w_norms = np.asarray(w_norms)
    repro = sub.basis.T @ (mu[:, None] * w_vectors.T)  # dim x n
    wanted = sub.basis[pts.indices].T
    drift = float(np.abs(repro - wanted).max())
    if drift > 1e-8:
        raise CertificateError(
            f"reproducing identity off by {drift!r} on the basis")
    atoms = (w_vectors / w_norms[:, None]).T
    return DiscretizationDictionary(
        subspace=sub, points=pts, p=float(p), w_vectors=w_vectors,
        w_norms=w_norms, atoms=atoms, m_p=m_p)


@dataclass
class TransferReport:
    trials: int
    violations: int
    max_ratio: float
    bound: float            # 2 M_p
    worst_left: float
    worst_right: float


def verify_transfer(sub: Subspace, ddict: DiscretizationDictionary,
                    trials: int = 100, seed: int = 0) -> TransferReport:
    """Check max_j |f(x^j)| <= 2 M_p max_j |<f, g_j>| on random f.

    Draws Gaussian coefficient vectors; a violation beyond the 1e-8
    slack raises with the witness coefficients.  Reports the largest
    observed left/right ratio.
    """
    rng = np.random.default_rng(seed)
    bound = 2.0 * ddict.m_p
    idx = ddict.points.indices
    max_ratio = 0.0
    worst = (0.0, 0.0)
    for _ in range(trials):
        c = rng.standard_normal(sub.dim)
        f = sub.evaluate(c)
        left = float(np.abs(f[idx]).max())
        right = ddict.norm_u(f)
        if left > bound * right + 1e-8:
            raise PropertyViolationError(
                f"transfer inequality violated: {left!r} > "
                f"{bound!r} * {right!r}", witness=c)
        if right > 0 and left / (bound * right) > max_ratio:
            max_ratio = left / (bound * right)
            worst = (left, bound * right)
    return TransferReport(trials=trials, violations=0, max_ratio=max_ratio,
                          bound=bound, worst_left=worst[0],
                          worst_right=worst[1])


# ---------------------------------------------------------------------------
# the subspace entropy experiment

def _function_witness(sub: Subspace, ddict: DiscretizationDictionary, p: float,
                      size: int, seed: int) -> np.ndarray:
    """Unit-ball members of the subspace in L_p(mu), as point-value rows."""
    rng = np.random.default_rng(seed)
    rows = [np.zeros((1, sub.support_size))]
    # kernel spikes peak at the sample points and drive the packing
    for x in ddict.points.indices:
        g = sub._kernel[x]
        nrm = sub.measure.norm(g, p)
        if nrm > 0:
            rows.append((g / nrm)[None, :])
    for i in range(sub.dim):
        u = sub.basis[:, i]
        rows.append((u / sub.measure.norm(u, p))[None, :])
    have = sum(r.shape[0] for r in rows)
    for _ in range(max(size - have, 0)):
        c = rng.standard_normal(sub.dim)
        f = sub.evaluate(c)
        nrm = sub.measure.norm(f, p)
        if nrm > 0:
            rows.append((f / nrm)[None, :])
    return np.vstack(rows)


@dataclass
class SubspaceEntropyResult:
    """Entropy profile of the subspace L_p ball in the sample seminorm."""

    profile: EntropyProfile
    m_p: float
    p: float
    subspace_dim: int
    support_size: int
    n_points: int
    k_list: list[int]
    envelope: np.ndarray
    upper_ratio: np.ndarray
    lower_ratio: np.ndarray
    cover_radii: np.ndarray
    spread: float


def it1_experiment(sub: Subspace, pts: SamplePointSet, p: float,
                   k_list: list[int], *, seed: int = 0,
                   cover_sample_size: int = 320,
                   witness_size: int = 512) -> SubspaceEntropyResult:
    """Entropy profile of { f : ||f||_p <= 1 } in max_j |f(x^j)|.

    Upper entries take the smaller of the trivial radius M_p (the whole
    ball sits within M_p of zero in the seminorm) and 2 M_p times the
    constructive cover radius of the g_j hull in L_{p'}(mu); the latter
    route treats the covering radius of the hull as a stand-in for its
    dual-ball counterpart, with the duality constant taken as one, and
    is labeled 'sparse-cover'.  Lower entries are certified packings of
    sampled unit-ball functions.  Ratios compare the uppers against
    M_p (log2(2n/k)/k)^(1/p).
    """
    _validate_p(p)
    n = pts.count
    k_list = sorted(int(k) for k in k_list)
    if not k_list or k_list[0] < 1 or k_list[-1] > n:
        raise ValueError(f"k_list must sit inside [1, n] = [1, {n}]")

    ddict = build_discretization_dictionary(sub, pts, p)
    octa = Octahedron(ddict.u_dictionary())
    certs = octahedron_cover_profile(octa, k_list, seed=seed,
                                     sample_size=cover_sample_size)
    radii = np.array([certs[k].radius for k in k_list])

    uppers, upper_src = [], []
    for k, r in zip(k_list, radii):
        theorem_route = 2.0 * ddict.m_p * r
        if theorem_route < ddict.m_p:
            uppers.append(theorem_route)
            upper_src.append("sparse-cover")
        else:
            uppers.append(ddict.m_p)
            upper_src.append("trivial")

    sample = _function_witness(sub, ddict, p, witness_size, seed + 1)
    metric = PointwiseMaxMetric(pts.indices)
    Dm = metric.pairwise(sample, sample)
    cap = min(sample.shape[0], 2 ** 14 + 1)
    _, insertion = _fps(Dm, cap, 0)
    lowers, lower_src = [], []
    for k in k_list:
        want = 2 ** k + 1
        if want <= len(insertion):
            lowers.append(insertion[want - 1] / 2.0)
            lower_src.append("packing")
        else:
            lowers.append(0.0)
            lower_src.append("none")

    profile = EntropyProfile.build(k_list, lowers, uppers, lower_src, upper_src)
    envelope = ddict.m_p * log_ratio_envelope(n, np.asarray(k_list), 1.0 / p)
    upper_ratio = profile.upper / envelope
    lower_ratio = profile.lower / envelope
    spread = float(upper_ratio.max() / upper_ratio.min())
    return SubspaceEntropyResult(
        profile=profile, m_p=ddict.m_p, p=float(p), subspace_dim=sub.dim,
        support_size=sub.support_size, n_points=n, k_list=k_list,
        envelope=envelope, upper_ratio=upper_ratio, lower_ratio=lower_ratio,
        cover_radii=radii, spread=spread)


def random_subspace(dim: int, support_size: int, seed: int, *,
                    measure: MeasureSpace | None = None) -> Subspace:
    """Orthonormalize seeded Gaussian vectors under the weighted product."""
    if measure is None:
        measure = MeasureSpace.uniform(support_size)
    if measure.size != support_size:
        raise DimensionMismatchError(support_size, measure.size, "measure points")
    if not 1 <= dim <= support_size:
        raise ValueError(
            f"subspace dimension must lie in [1, {support_size}], got {dim}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((support_size, dim))
    root = np.sqrt(measure.weights)
    Q, R = np.linalg.qr(root[:, None] * G)
    Q = Q * np.sign(np.diag(R))  # deterministic orientation
    return Subspace(measure, Q / root[:, None])
