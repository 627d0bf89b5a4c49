"""Best m-term approximation over a dictionary of unit atoms.

Two paths to the m-term error: exhaustive search over supports (exact,
tiny scale only) and a weak Chebyshev greedy loop.  Each greedy step
computes the norming functional of the current residual from scratch,
picks the atom with the largest absolute pairing (lowest index on
ties), and re-projects onto everything selected so far.  For q = 2 the
projection is weighted least squares; otherwise it minimizes the q-th
power of the residual norm with the shared smoothed-Newton solver.

The unit ball of norm_A is the absolutely convex hull of the atoms;
``Octahedron`` wraps a dictionary with that membership test and
``sample_octahedron`` draws signed Dirichlet mixtures from it, mixing
support sizes across dyadic scales so the hull's extreme structure is
represented.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._optim import minimize_power_residual
from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    EmptySampleError,
    SpanMembershipError,
    ZeroVectorError,
)
from .spaces import Dictionary, norm, norm_A, norming_functional

__all__ = [
    "SparseApproximant",
    "Octahedron",
    "SigmaProfile",
    "chebyshev_project",
    "best_mterm_bruteforce",
    "wcga",
    "sample_octahedron",
    "sigma_profile",
]

_BRUTE_FORCE_BUDGET = 10 ** 6


@dataclass
class SparseApproximant:
    """Result of an m-term approximation.

    ``support`` and ``coefficients`` are aligned; ``history`` holds the
    residual norm after 0, 1, ... steps and is nonincreasing for
    Chebyshev-type greedy runs.  ``residual_norm`` always equals the
    recomputed norm of f minus the reconstruction.
    """

    support: list[int]
    coefficients: np.ndarray
    residual_norm: float
    history: list[float]
    tol_reached: bool = False
    step_coefficients: list[np.ndarray] | None = None

    def reconstruct(self, dictionary: Dictionary) -> np.ndarray:
        if not self.support:
            return np.zeros(dictionary.space.dim)
        return dictionary.atoms[:, self.support] @ self.coefficients


@dataclass(frozen=True, eq=False)
class Octahedron:
    """The norm_A unit ball of a dictionary (absolutely convex atom hull)."""

    dictionary: Dictionary
    membership_tol: float = 1e-9

    def contains(self, f: np.ndarray) -> bool:
        try:
            return norm_A(f, self.dictionary) <= 1.0 + self.membership_tol
        except SpanMembershipError:
            return False


def chebyshev_project(f: np.ndarray, support: list[int], dictionary: Dictionary,
                      *, tol: float = 1e-10,
                      warm: np.ndarray | None = None) -> np.ndarray:
    """Coefficients minimizing the ambient norm of f - sum c_j g_j on the support.

    q = 2 is closed form (weighted least squares, minimum-norm solution
    when atoms on the support are dependent).  Other q minimize the
    q-th-power objective by smoothed Newton down to a relative Newton
    decrement of tol.
    """
    space = dictionary.space
    f = np.asarray(f, dtype=float)
    if f.shape != (space.dim,):
        raise DimensionMismatchError(space.dim, f.shape)
    if len(support) == 0:
        return np.zeros(0)
    G = dictionary.atoms[:, list(support)]
    w = space.weight_vector()
    if space.q == 2.0:
        sw = np.sqrt(w)
        c, *_ = np.linalg.lstsq(sw[:, None] * G, sw * f, rcond=None)
        return c
    scale = norm(space, f)
    if scale == 0.0:
        return np.zeros(len(support))
    fs = f / scale
    x0 = None if warm is None else np.asarray(warm, dtype=float) / scale
    res = minimize_power_residual(G, fs, w, space.q, x0=x0, decrement_tol=tol)
    return res.x * scale


def _residual_norm(f, support, coeffs, dictionary):
    space = dictionary.space
    if not len(support):
        return norm(space, f)
    return norm(space, f - dictionary.atoms[:, list(support)] @ coeffs)


def best_mterm_bruteforce(f: np.ndarray, dictionary: Dictionary, m: int,
                          *, tol: float = 1e-10) -> SparseApproximant:
    """Exact best m-term approximation by enumerating all supports.

    Guarded by comb(n, m) <= 1e6; beyond that the greedy loop is the
    intended tool.  Ties go to the lexicographically first support.
    """
    n = dictionary.size
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, {n}], got {m}")
    count = math.comb(n, m)
    if count > _BRUTE_FORCE_BUDGET:
        raise BudgetExceededError(
            f"comb({n}, {m}) = {count} supports exceed the brute-force budget "
            f"{_BRUTE_FORCE_BUDGET}; use wcga for this size")
    f = np.asarray(f, dtype=float)
    fnorm = norm(dictionary.space, f)
    best: SparseApproximant | None = None
    for combo in itertools.combinations(range(n), m):
        support = list(combo)
        coeffs = chebyshev_project(f, support, dictionary, tol=tol)
        r = _residual_norm(f, support, coeffs, dictionary)
        if best is None or r < best.residual_norm:
            best = SparseApproximant(support=support, coefficients=coeffs,
                                     residual_norm=r, history=[fnorm, r])
    assert best is not None
    best.history = [fnorm] if m == 0 else [fnorm, best.residual_norm]
    return best


def wcga(f: np.ndarray, dictionary: Dictionary, m: int,
         *, t: float = 1.0, tol: float = 1e-12, project_tol: float = 1e-10,
         record_steps: bool = False) -> SparseApproximant:
    """Weak Chebyshev greedy approximation with up to m steps.

    The weakness parameter t in (0, 1] is accepted for interface
    fidelity: any index whose pairing reaches t times the maximum is
    admissible, and this implementation always takes the maximum itself
    (lowest index on ties), which satisfies the threshold for every t.
    Stops early once the residual norm drops to ``tol`` or no atom sees
    the residual.
    """
    space = dictionary.space
    n = dictionary.size
    if not 0 < t <= 1.0:
        raise ValueError(f"weakness parameter must lie in (0, 1], got {t}")
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, {n}], got {m}")
    f = np.asarray(f, dtype=float)
    fnorm = norm(space, f)
    if fnorm == 0.0:
        raise ZeroVectorError("cannot run the greedy loop on the zero vector")
    support: list[int] = []
    coeffs = np.zeros(0)
    history = [fnorm]
    snaps: list[np.ndarray] = []
    tol_reached = False
    residual = f.copy()
    for _ in range(m):
        if history[-1] <= tol:
            tol_reached = True
            break
        F = norming_functional(space, residual)
        vals = np.abs(dictionary.pairings(F.coefficients))
        if support:
            vals[support] = -1.0
        j = int(np.argmax(vals))
        if vals[j] <= 1e-14 * max(fnorm, 1.0):
            break  # residual invisible to the remaining atoms
        support.append(j)
        coeffs = chebyshev_project(f, support, dictionary, tol=project_tol,
                                   warm=np.append(coeffs, 0.0))
        residual = f - dictionary.atoms[:, support] @ coeffs
        history.append(norm(space, residual))
        if record_steps:
            snaps.append(coeffs.copy())
    if history[-1] <= tol:
        tol_reached = True
    return SparseApproximant(
        support=support, coefficients=coeffs,
        residual_norm=history[-1], history=history, tol_reached=tol_reached,
        step_coefficients=snaps if record_steps else None)


def sample_octahedron(dictionary: Dictionary, count: int, seed: int,
                      *, alpha: float = 1.0) -> list[dict]:
    """Draw signed Dirichlet mixtures of atoms from the norm_A unit ball.

    Support sizes are log-uniform over [1, n] so that both near-vertex
    and spread-out elements appear; coefficients are Dirichlet(alpha)
    with independent signs, hence sum |c_j| = 1 exactly.  Returns dicts
    with the vector and its generating (indices, coefficients) pair.
    """
    if count < 1:
        raise EmptySampleError("need at least one sample")
    rng = np.random.default_rng(seed)
    n = dictionary.size
    out = []
    for _ in range(count):
        k = int(round(math.exp(rng.uniform(0.0, math.log(n))))) if n > 1 else 1
        k = min(max(k, 1), n)
        idx = np.sort(rng.choice(n, size=k, replace=False))
        theta = rng.dirichlet(np.full(k, alpha))
        signs = rng.choice([-1.0, 1.0], size=k)
        c = signs * theta
        vec = dictionary.atoms[:, idx] @ c
        out.append({"vector": vec, "indices": idx, "coefficients": c})
    return out


@dataclass
class SigmaProfile:
    """max-over-samples greedy residuals per m, with a log-log slope."""

    m_list: list[int]
    values: np.ndarray
    slope: float
    intercept_log2: float
    per_sample: np.ndarray = field(repr=False, default=None)


def sigma_profile(samples: list[np.ndarray], dictionary: Dictionary,
                  m_list: list[int], *, t: float = 1.0,
                  project_tol: float = 1e-10,
                  membership_tol: float = 1e-9) -> SigmaProfile:
    """Empirical m-term error of the atom hull over a witness sample.

    Every sample must pass the hull membership test (norm_A <= 1 plus
    tolerance).  One greedy run per sample up to max(m_list) supplies
    the residuals at every intermediate m.  The reported slope is the
    least-squares fit of log2(value) against log2(m) over the positive
    entries.
    """
    if not samples:
        raise EmptySampleError("sigma profile needs at least one sample")
    if not m_list or sorted(m_list) != list(m_list) or m_list[0] < 1:
        raise ValueError("m_list must be increasing positive integers")
    for i, f in enumerate(samples):
        value = norm_A(f, dictionary)
        if value > 1.0 + membership_tol:
            raise ValueError(
                f"sample {i} lies outside the octahedron: norm_A = {value!r}")
    m_max = m_list[-1]
    table = np.zeros((len(samples), len(m_list)))
    for i, f in enumerate(samples):
        run = wcga(f, dictionary, m_max, t=t, project_tol=project_tol)
        hist = run.history
        for j, m in enumerate(m_list):
            table[i, j] = hist[m] if m < len(hist) else hist[-1]
    values = table.max(axis=0)
    pos = values > 0
    if pos.sum() >= 2:
        slope, intercept = np.polyfit(np.log2(np.asarray(m_list)[pos]),
                                      np.log2(values[pos]), 1)
    else:
        slope, intercept = float("nan"), float("nan")
    return SigmaProfile(m_list=list(m_list), values=values,
                        slope=float(slope), intercept_log2=float(intercept),
                        per_sample=table)
