"""Recovery-problem builders.

Worst-case counterexample constructions for both noise models, the three
fixed 2x2 demonstration instances, bounded-noise samplers, random matrices
with controlled isometry constants, and the selection-gap evaluator that
backs the per-iteration correctness bound.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateMatrix,
    DimensionMismatch,
    GammaOutOfRange,
    NotProperSubset,
    OutOfSharpRegion,
    ParameterOutOfRange,
)
from .linalg import as_matrix, as_vector, columns_submatrix, project_complement
from .omp import SparseSignal
from .rip import exact_ric, in_sharp_region

NOISE_L2 = "l2_bounded"
NOISE_LINF = "linf_bounded"

_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Instance:
    """One recovery problem: measurements y = A x + v with a noise bound.

    ``noise_model`` is NOISE_L2 (||v||_2 <= epsilon) or NOISE_LINF
    (||A^T v||_inf <= epsilon); the bound is validated on construction.
    """

    A: np.ndarray
    x: SparseSignal
    v: np.ndarray
    epsilon: float
    noise_model: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A = as_matrix(self.A)
        v = as_vector(self.v)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "v", v)
        if A.shape[1] != self.x.n or A.shape[0] != v.shape[0]:
            raise DimensionMismatch(
                f"matrix {A.shape} incompatible with x of length {self.x.n} "
                f"and v of length {v.shape[0]}"
            )
        if not self.epsilon > 0:
            raise ParameterOutOfRange(f"epsilon must be > 0, got {self.epsilon}")
        if self.noise_model == NOISE_L2:
            bound = float(np.linalg.norm(v))
        elif self.noise_model == NOISE_LINF:
            bound = float(np.max(np.abs(A.T @ v)))
        else:
            raise ParameterOutOfRange(f"unknown noise model {self.noise_model!r}")
        if bound > self.epsilon + _BOUND_SLACK:
            raise ParameterOutOfRange(
                f"noise bound violated: {bound} > epsilon {self.epsilon}"
            )

    def measurements(self):
        return self.A @ self.x.values + self.v


def orthonormal_complement_of_ones(K):
    """K x (K-1) matrix with orthonormal columns, each orthogonal to the
    all-ones vector.  Deterministic given K; empty for K = 1."""
    if K < 1:
        raise ParameterOutOfRange(f"K must be >= 1, got {K}")
    ones = np.full((K, 1), 1.0 / math.sqrt(K))
    Q = np.linalg.qr(ones, mode="complete")[0]
    # qr may flip the sign of the leading column; the complement is unaffected
    return Q[:, 1:]


def _beta(K):
    return (math.sqrt(K + 1) - 1.0) / math.sqrt(K)


def counterexample_operator(K, delta):
    """The (K+1)x(K+1) pair (A, U) with A = D U used by both worst-case
    constructions.

    U stacks the orthonormal complement of the ones direction with two
    explicit rows mixing the ones direction and the last coordinate; D scales
    row K (1-based) by sqrt(1-delta) and every other row by sqrt(1+delta),
    so the Gram spectrum is exactly {1-delta, 1+delta}.
    """
    if not in_sharp_region(K, delta) or delta <= 0.0:
        raise OutOfSharpRegion(f"delta {delta} not in (0, 1/sqrt({K + 1}))")
    beta = _beta(K)
    s = math.sqrt(beta * beta + 1.0)
    xi = orthonormal_complement_of_ones(K)
    U = np.zeros((K + 1, K + 1))
    U[: K - 1, :K] = xi.T
    U[K - 1, :K] = 1.0 / (math.sqrt(K) * s)
    U[K - 1, K] = beta / s
    U[K, :K] = beta / (math.sqrt(K) * s)
    U[K, K] = -1.0 / s
    d = np.full(K + 1, math.sqrt(1.0 + delta))
    d[K - 1] = math.sqrt(1.0 - delta)
    return d[:, None] * U, U, d


def l2_gamma_bound(K, delta, epsilon):
    """Open upper bound on the signal magnitude for the l2-noise construction."""
    return math.sqrt(1.0 - delta) * epsilon / (1.0 - math.sqrt(K + 1) * delta)


def linf_gamma_bound(K, delta, epsilon):
    """Open upper bound on the signal magnitude for the linf-noise construction."""
    return 2.0 * epsilon / (1.0 - math.sqrt(K + 1) * delta)


def _check_gamma(gamma, bound):
    if not 0.0 < gamma < bound:
        raise GammaOutOfRange(f"gamma {gamma} outside (0, {bound})")


def build_counterexample_l2(K, delta, epsilon, gamma):
    """Instance on which OMP mispicks column K+1 at iteration 1 under l2 noise.

    The signal puts magnitude gamma on the first K coordinates; the noise is
    built so A^T v vanishes on the support and is -sqrt(1-delta)*epsilon on
    the off-support coordinate.
    """
    A, U, d = counterexample_operator(K, delta)
    _check_gamma(gamma, l2_gamma_bound(K, delta, epsilon))
    x = SparseSignal(np.concatenate([np.full(K, gamma), [0.0]]), sparsity=K)
    target = np.zeros(K + 1)
    target[K] = -math.sqrt(1.0 - delta) * epsilon
    v = (U @ target) / d
    return Instance(
        A=A,
        x=x,
        v=v,
        epsilon=epsilon,
        noise_model=NOISE_L2,
        metadata={"K": K, "delta": delta, "gamma": gamma},
    )


def build_counterexample_linf(K, delta, epsilon, gamma):
    """Same operator and signal as the l2 construction; the noise is built so
    A^T v = -epsilon on every coordinate."""
    A, U, d = counterexample_operator(K, delta)
    _check_gamma(gamma, linf_gamma_bound(K, delta, epsilon))
    x = SparseSignal(np.concatenate([np.full(K, gamma), [0.0]]), sparsity=K)
    v = -epsilon * (U @ np.ones(K + 1)) / d
    return Instance(
        A=A,
        x=x,
        v=v,
        epsilon=epsilon,
        noise_model=NOISE_LINF,
        metadata={"K": K, "delta": delta, "gamma": gamma},
    )


def counterexample_correlations(noise_model, K, delta, epsilon, gamma):
    """Closed forms for the first-iteration correlation magnitudes:
    (max over the support, max off the support)."""
    root = math.sqrt(K + 1)
    if noise_model == NOISE_L2:
        return (
            (1.0 - delta / root) * gamma,
            K * delta * gamma / root + math.sqrt(1.0 - delta) * epsilon,
        )
    if noise_model == NOISE_LINF:
        return (
            (1.0 - delta / root) * gamma - epsilon,
            K * delta * gamma / root + epsilon,
        )
    raise ParameterOutOfRange(f"unknown noise model {noise_model!r}")


def build_example1(delta, a):
    """2x2 unit-norm-column instance on which the bare linf stopping rule
    keeps running and picks up the off-support column."""
    if not 0.0 < delta < 1.0:
        raise ParameterOutOfRange(f"delta must lie in (0, 1), got {delta}")
    if not a > (1.0 + delta) / (1.0 - delta):
        raise ParameterOutOfRange(
            f"a must exceed (1+delta)/(1-delta) = {(1 + delta) / (1 - delta)}, got {a}"
        )
    root = math.sqrt(1.0 - delta * delta)
    A = np.array([[root, 0.0], [delta, 1.0]])
    return Instance(
        A=A,
        x=SparseSignal(np.array([a, 0.0]), sparsity=1),
        v=np.array([-2.0 * delta / root, 1.0]),
        epsilon=1.0,
        noise_model=NOISE_LINF,
        metadata={"K": 1, "delta": delta, "a": a},
    )


def _scaled_identity_example(delta, a, a_bound, epsilon, noise_model):
    if not 0.0 < delta < 1.0 / math.sqrt(2.0):
        raise ParameterOutOfRange(f"delta must lie in (0, 1/sqrt(2)), got {delta}")
    if not 0.0 < a < a_bound:
        raise ParameterOutOfRange(f"a {a} outside (0, {a_bound})")
    return Instance(
        A=delta * np.eye(2),
        x=SparseSignal(np.array([a, 0.0]), sparsity=1),
        v=np.array([1.0, 1.0]),
        epsilon=epsilon,
        noise_model=noise_model,
        metadata={"K": 1, "delta": delta, "a": a},
    )


def example2_a_bound(delta):
    return math.sqrt(2.0 * (1.0 - delta)) / (1.0 - math.sqrt(2.0) * delta)


def example3_a_bound(delta):
    return 2.0 * math.sqrt(2.0) * delta / (1.0 - math.sqrt(2.0) * delta)


def build_example2(delta, a):
    """Scaled-identity instance recovered in one iteration under the l2 rule
    even though the worst-case magnitude bound is violated."""
    return _scaled_identity_example(
        delta, a, example2_a_bound(delta), math.sqrt(2.0), NOISE_L2
    )


def build_example3(delta, a):
    """Scaled-identity instance recovered in one iteration under the
    corrected linf rule even though the worst-case magnitude bound is
    violated."""
    return _scaled_identity_example(
        delta, a, example3_a_bound(delta), math.sqrt(2.0) * delta, NOISE_LINF
    )


def lemma1_gap(A, x, subset, ric_budget=None):
    """Selection-gap bound for one partially-completed recovery state.

    ``subset`` (1-based) must be a proper subset of the support of ``x``.
    Returns lhs_gap, the difference of the max absolute correlations of
    on-support and off-support columns against the projected residual
    direction, and rhs_bound, the closed-form lower bound computed with the
    exactly enumerated RIC of order |support|+1.
    """
    A = as_matrix(A)
    support = x.support
    subset = frozenset(int(i) for i in subset)
    if not (subset < support):
        raise NotProperSubset(f"{sorted(subset)} is not a proper subset of {sorted(support)}")
    n = A.shape[1]
    remaining = sorted(support - subset)
    off_support = sorted(set(range(1, n + 1)) - support)
    A_S = A[:, [i - 1 for i in sorted(subset)]]
    x_remaining = np.array([x.values[i - 1] for i in remaining])
    direction = project_complement(A_S, columns_submatrix(A, remaining) @ x_remaining)
    lhs_on = float(np.max(np.abs(columns_submatrix(A, remaining).T @ direction)))
    lhs_off = float(np.max(np.abs(columns_submatrix(A, off_support).T @ direction)))
    kwargs = {} if ric_budget is None else {"budget": ric_budget}
    delta = exact_ric(A, len(support) + 1, **kwargs).delta
    r = len(remaining)
    rhs = (1.0 - math.sqrt(r + 1) * delta) * float(np.linalg.norm(x_remaining)) / math.sqrt(r)
    return {"lhs_gap": lhs_on - lhs_off, "rhs_bound": rhs}


def sample_l2_noise(m, epsilon, seed):
    """Noise vector uniform on the epsilon-ball: ||v||_2 <= epsilon."""
    if not epsilon > 0:
        raise ParameterOutOfRange(f"epsilon must be > 0, got {epsilon}")
    rng = _as_rng(seed)
    direction = rng.standard_normal(m)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(m)
        norm = np.linalg.norm(direction)
    radius = epsilon * rng.uniform() ** (1.0 / m)
    return direction * (radius / norm)


def sample_linf_noise(A, epsilon, seed, max_attempts=100):
    """Noise vector with ||A^T v||_inf <= epsilon, the level drawn uniformly.

    Raises DegenerateMatrix when A^T v vanishes for 100 consecutive draws.
    """
    if not epsilon > 0:
        raise ParameterOutOfRange(f"epsilon must be > 0, got {epsilon}")
    A = as_matrix(A)
    rng = _as_rng(seed)
    for _ in range(max_attempts):
        v = rng.standard_normal(A.shape[0])
        level = float(np.max(np.abs(A.T @ v)))
        if level > 0.0:
            c = 1.0 - rng.uniform(0.0, 1.0)  # uniform on (0, 1]
            return v * (c * epsilon / level)
    raise DegenerateMatrix(f"A^T v vanished for {max_attempts} consecutive draws")


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_matrix_with_ric(m, n, delta_cap, seed):
    """Random m x n matrix (n <= m) whose RIC of every order is below
    ``delta_cap``.

    Built as an orthonormal-column embedding of an n x n factor whose squared
    singular values are drawn from [1 - delta_cap, 1 + delta_cap] with both
    endpoints attained, so the top-order RIC equals delta_cap exactly and
    lower orders fall strictly inside (0, delta_cap].
    """
    if n > m:
        raise DimensionMismatch(f"need n <= m, got {m}x{n}")
    if not 0.0 < delta_cap < 1.0:
        raise ParameterOutOfRange(f"delta_cap must lie in (0, 1), got {delta_cap}")
    rng = _as_rng(seed)
    squared = rng.uniform(1.0 - delta_cap, 1.0 + delta_cap, size=n)
    squared[0] = 1.0 - delta_cap
    if n > 1:
        squared[-1] = 1.0 + delta_cap
    W1 = np.linalg.qr(rng.standard_normal((n, n)))[0]
    W2 = np.linalg.qr(rng.standard_normal((n, n)))[0]
    B = (W1 * np.sqrt(squared)) @ W2.T
    Q = np.linalg.qr(rng.standard_normal((m, n)))[0]
    return Q @ B


def random_frame_with_ric(m, n, order, delta_bound, seed, attempts=200):
    """Random m x n frame (n > m allowed) with exact order-``order`` RIC
    strictly below ``delta_bound``.

    Each attempt tightens a Gaussian draw toward a unit-norm tight frame and
    then applies the globally optimal rescaling; draws whose best achievable
    constant still exceeds the bound are rejected.
    """
    from itertools import combinations

    rng = _as_rng(seed)
    for _ in range(attempts):
        A = rng.standard_normal((m, n))
        for _ in range(60):
            U, _, Vt = np.linalg.svd(A, full_matrices=False)
            A = math.sqrt(n / m) * U @ Vt  # project onto tight frames
            A = A / np.linalg.norm(A, axis=0)  # renormalize columns
        gram = A.T @ A
        lam_min = math.inf
        lam_max = -math.inf
        for S in combinations(range(n), order):
            idx = list(S)
            eigenvalues = np.linalg.eigvalsh(gram[np.ix_(idx, idx)])
            lam_min = min(lam_min, eigenvalues[0])
            lam_max = max(lam_max, eigenvalues[-1])
        if lam_min <= 0:
            continue
        best = (lam_max - lam_min) / (lam_max + lam_min)
        if 0.0 < best < delta_bound:
            return A * math.sqrt(2.0 / (lam_max + lam_min))
    raise DegenerateMatrix(
        f"no {m}x{n} frame with order-{order} RIC below {delta_bound} "
        f"found in {attempts} attempts"
    )
