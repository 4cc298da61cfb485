"""Dense operators in indicator coordinates over a discretized space.

An operator acts on step-function coefficients, (Af)_i = sum_j A[i][j] f_j;
the measure enters only through norms and through the rank-one
constructors, whose kernels integrate against the weights.  The exact
operator norm is available at p = 1; for general p a certified lower-bound
estimator is provided (a dual-ascent power method seeded with every
normalized indicator).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .lpspace import StepFunction, _check_p
from .measure import MeasureSpace

__all__ = [
    "MatrixOperator",
    "MultiplicationOperator",
    "FunctionKernel",
    "mult_op",
    "rank_one_diffuse",
    "rank_one_atomic_offdiag",
    "opnorm_p1",
    "p1_column_quotients",
    "opnorm_estimate",
    "pinch",
    "projections",
]


class MatrixOperator:
    """Square dense operator on the coordinates of a MeasureSpace.

    Immutable value: the entry array is copied on construction and marked
    read-only.  At desk scale every operator is finite-rank, which is the
    discrete surrogate of compactness; "compact" behavior shows up as decay
    across truncation and refinement, not as a property of a single matrix.
    """

    def __init__(self, entries: Sequence[Sequence[float]], space: MeasureSpace):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator entries must be square, got shape {arr.shape}")
        if arr.shape[0] != space.dimension:
            raise ValueError(
                f"operator dimension {arr.shape[0]} does not match "
                f"space dimension {space.dimension}"
            )
        arr.setflags(write=False)
        self.entries = arr
        self.space = space

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    @classmethod
    def identity(cls, space: MeasureSpace) -> "MatrixOperator":
        return cls(np.eye(space.dimension), space)

    @classmethod
    def zero(cls, space: MeasureSpace) -> "MatrixOperator":
        return cls(np.zeros((space.dimension, space.dimension)), space)

    # -- action -----------------------------------------------------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(x, dtype=float)

    def apply(self, f: StepFunction) -> StepFunction:
        if f.space != self.space:
            raise ValueError("operator and argument live on different spaces")
        return StepFunction(self.matvec(f.coefficients), self.space)

    # -- algebra ----------------------------------------------------------

    def _same_space(self, other: "MatrixOperator") -> None:
        if self.space != other.space:
            raise ValueError("operators live on different spaces")

    def __add__(self, other: "MatrixOperator") -> "MatrixOperator":
        self._same_space(other)
        return MatrixOperator(self.entries + other.entries, self.space)

    def __sub__(self, other: "MatrixOperator") -> "MatrixOperator":
        self._same_space(other)
        return MatrixOperator(self.entries - other.entries, self.space)

    def __neg__(self) -> "MatrixOperator":
        return MatrixOperator(-self.entries, self.space)

    def __mul__(self, scalar: float) -> "MatrixOperator":
        return MatrixOperator(self.entries * float(scalar), self.space)

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixOperator") -> "MatrixOperator":
        self._same_space(other)
        return MatrixOperator(self.entries @ other.entries, self.space)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dimension})"


class MultiplicationOperator(MatrixOperator):
    """Diagonal operator f -> u * f for a step function u."""

    def __init__(self, u_values: Sequence[float], space: MeasureSpace):
        u = np.array(u_values, dtype=float)
        if u.ndim != 1 or u.size != space.dimension:
            raise ValueError("u_values length does not match the space dimension")
        super().__init__(np.diag(u), space)
        u.setflags(write=False)
        self.u_values = u

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.u_values * np.asarray(x, dtype=float)

    @property
    def opnorm(self) -> float:
        """Operator norm on every weighted L_p: max_i |u_i|."""
        return float(np.max(np.abs(self.u_values)))


def mult_op(u: StepFunction) -> MultiplicationOperator:
    """Multiplication operator M_u f = u f."""
    return MultiplicationOperator(u.coefficients, u.space)


def rank_one_diffuse(eta: StepFunction, g: StepFunction) -> MatrixOperator:
    """Rank-one integral operator K f = (integral of eta * f dmu) * g.

    In coordinates K[i][j] = g_i * eta_j * mu_j.  The constructor works on
    any space; the name records its role as the positive rank-one building
    block whose diagonal dies under refinement of the diffuse part.
    """
    if eta.space != g.space:
        raise ValueError("eta and g live on different spaces")
    space = eta.space
    row = eta.coefficients * space.masses
    return MatrixOperator(np.outer(g.coefficients, row), space)


def rank_one_atomic_offdiag(j: int, eta: StepFunction) -> MatrixOperator:
    """Rank-one operator K f = (sum_{k != j} f_k eta_k mu_k) * 1_{B_j}.

    Only row j is nonzero and its diagonal entry vanishes, so the operator
    is disjoint from every multiplication operator.  Defined on purely
    atomic spaces only: the construction integrates over the complement of
    a single atom.
    """
    space = eta.space
    if space.has_diffuse:
        raise ValueError("rank_one_atomic_offdiag requires a purely atomic space")
    j = int(j)
    if not 0 <= j < space.dimension:
        raise ValueError(f"atom index {j} out of range for dimension {space.dimension}")
    row = eta.coefficients * space.masses
    entries = np.zeros((space.dimension, space.dimension))
    entries[j, :] = row
    entries[j, j] = 0.0
    return MatrixOperator(entries, space)


def p1_column_quotients(A: MatrixOperator) -> np.ndarray:
    """Per-column quotients (sum_i |A[i][j]| mu_i) / mu_j.

    The j-th quotient is the exact L1 norm of A applied to the normalized
    indicator of coordinate j; their maximum is the exact L1 -> L1 operator
    norm.  Column sums accumulate top to bottom in a fixed order, so
    dropping rows (pinching, tail projections) can only decrease every
    quotient, exactly, in floating point.
    """
    mu = A.space.masses
    weighted = np.abs(A.entries) * mu[:, None]
    colsums = np.cumsum(weighted, axis=0)[-1, :]
    return colsums / mu


def opnorm_p1(A: MatrixOperator) -> float:
    """Exact operator norm of A on weighted L1."""
    return float(np.max(p1_column_quotients(A)))


def _pnorm(x: np.ndarray, p: float) -> float:
    if p == 1.0:
        return float(np.sum(np.abs(x)))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _dual_ascent(B: np.ndarray, p: float, q: float, x: np.ndarray, max_iter: int, tol: float) -> float:
    """Best |Bx|_p over the iterates of the p-norm power method, |x|_p = 1.

    Each iterate value is an attained Rayleigh-type quotient, hence a true
    lower bound for the induced p-norm of B.
    """
    xn = _pnorm(x, p)
    if xn == 0.0:
        return 0.0
    x = x / xn
    best = 0.0
    prev = -1.0
    for _ in range(max_iter):
        y = B @ x
        gamma = _pnorm(y, p)
        if gamma == 0.0:
            break
        if gamma > best:
            best = gamma
        # dual vector of y: |xi|_q = 1 and <xi, y> = |y|_p
        xi = np.sign(y) * np.abs(y) ** (p - 1.0) / gamma ** (p - 1.0)
        z = B.T @ xi
        zeta = _pnorm(z, q)
        if zeta <= float(z @ x) * (1.0 + 1e-14):
            break  # dual stationarity: x is a local maximizer
        if prev >= 0.0 and abs(gamma - prev) <= tol * max(gamma, 1.0):
            break
        prev = gamma
        x = np.sign(z) * np.abs(z) ** (q - 1.0) / zeta ** (q - 1.0)
    return best


def opnorm_estimate(A: MatrixOperator, p: float, *, max_iter: int = 100, tol: float = 1e-12) -> float:
    """Certified lower bound for the operator norm of A on weighted L_p.

    The weighted problem is mapped isometrically to the unweighted sequence
    space (B = W^{1/p} A W^{-1/p}) and a dual-ascent power method is run
    from every normalized-indicator seed and from the all-ones seed, keeping
    the best attained quotient.  The result is therefore at least
    max_j |A e_j|_p / |e_j|_p and at least max_i |A_ii| (the norm of the
    diagonal part, attained by indicator seeds in exact arithmetic, floored
    explicitly to keep the guarantee under roundoff).  At p = 1 the exact
    norm is returned.
    """
    p = _check_p(p)
    if p == 1.0:
        return opnorm_p1(A)
    n = A.dimension
    mu = A.space.masses
    w = mu ** (1.0 / p)
    B = (w[:, None] * A.entries) / w[None, :]
    q = p / (p - 1.0)

    best = float(np.max(np.abs(np.diag(A.entries))))
    # first iterate of every indicator seed, computed directly
    colnorms = np.sum(np.abs(B) ** p, axis=0) ** (1.0 / p)
    best = max(best, float(np.max(colnorms)))

    seeds = [np.ones(n)]
    seeds.extend(np.eye(n)[:, j] for j in range(n))
    for x0 in seeds:
        value = _dual_ascent(B, p, q, x0, max_iter, tol)
        if value > best:
            best = value
    return best


def pinch(A: MatrixOperator, blocks: Sequence[Sequence[int]]) -> MatrixOperator:
    """Block-diagonal compression sum_b P_b A P_b.

    ``blocks`` must partition the coordinate indices.  Entries (i, j) with
    i and j in different blocks are zeroed; kept entries are copied
    unchanged, so at p = 1 the compression is norm-contractive exactly.
    """
    n = A.dimension
    block_id = np.full(n, -1, dtype=int)
    for b, block in enumerate(blocks):
        for i in block:
            i = int(i)
            if not 0 <= i < n:
                raise ValueError(f"block index {i} out of range for dimension {n}")
            if block_id[i] != -1:
                raise ValueError(f"blocks overlap at index {i}")
            block_id[i] = b
    if np.any(block_id == -1):
        missing = np.nonzero(block_id == -1)[0].tolist()
        raise ValueError(f"blocks do not cover indices {missing}")
    keep = block_id[:, None] == block_id[None, :]
    return MatrixOperator(np.where(keep, A.entries, 0.0), A.space)


def projections(
    space: MeasureSpace, n: int
) -> tuple[list[MultiplicationOperator], MultiplicationOperator]:
    """Coordinate projections P_1..P_n and the tail projection Q_n.

    P_j keeps only the j-th coordinate (multiplication by the indicator of
    the j-th atom/cell); Q_n = I - sum_j P_j keeps everything after the
    first n coordinates.  The identity sum P_j + Q_n = I holds exactly.
    """
    n = int(n)
    if not 0 <= n <= space.dimension:
        raise ValueError(f"n must lie in [0, {space.dimension}], got {n}")
    ps = []
    for j in range(n):
        e = np.zeros(space.dimension)
        e[j] = 1.0
        ps.append(MultiplicationOperator(e, space))
    tail = np.ones(space.dimension)
    tail[:n] = 0.0
    return ps, MultiplicationOperator(tail, space)


class FunctionKernel:
    """Finite-rank integral kernel given at the function level.

    K f = sum_r (integral of eta_r * f dmu) * g_r with eta_r, g_r functions
    on the diffuse interval.  Because the factors are functions rather than
    coefficient vectors, the same kernel can be discretized at every
    refinement level (by per-cell averaging), which is what makes "the same
    perturbation across levels" meaningful.
    """

    def __init__(self, pairs: Sequence[tuple[Callable[[float], float], Callable[[float], float]]]):
        self.pairs = list(pairs)

    @property
    def rank(self) -> int:
        return len(self.pairs)

    @classmethod
    def random_polynomial(
        cls,
        rank: int,
        seed: int,
        degree: int = 2,
        coeff_range: tuple[float, float] = (-1.0, 1.0),
    ) -> "FunctionKernel":
        """Seeded kernel with polynomial factors.

        Coefficients are drawn i.i.d. uniform on ``coeff_range`` from
        numpy's PCG64 generator seeded with (seed,), in the fixed order
        (eta_1, g_1, eta_2, g_2, ...), so the kernel is reproducible.
        """
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(rank):
            eta_c = rng.uniform(*coeff_range, degree + 1)
            g_c = rng.uniform(*coeff_range, degree + 1)
            pairs.append((np.polynomial.Polynomial(eta_c), np.polynomial.Polynomial(g_c)))
        return cls(pairs)

    def discretize(self, space: MeasureSpace) -> MatrixOperator:
        """Matrix of the kernel on a given space (cell-averaged factors)."""
        acc = np.zeros((space.dimension, space.dimension))
        for eta_fn, g_fn in self.pairs:
            eta = StepFunction.from_function(space, eta_fn)
            g = StepFunction.from_function(space, g_fn)
            acc += np.outer(g.coefficients, eta.coefficients * space.masses)
        return MatrixOperator(acc, space)
