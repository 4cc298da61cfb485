"""Essential-norm machinery: the formula, certified lower bounds for
compact perturbations, diagonal compactification, and decay profiles.

The essential norm of a multiplication operator (its distance to the
compact operators) equals

    max( sup of |u| over the diffuse part,  limsup_n |u(atom n)| ).

At desk scale both directions are certified separately: from above by
explicit truncation perturbations, from below by two constructive routes
that never search the perturbation space:

* pinching: compressing M_u + K to the coordinate diagonal is
  norm-contractive and leaves M_u + D_K, where D_K carries the diagonal
  scalars of K, so |M_u + K| >= |M_u + D_K|, exactly at p = 1;
* witness pairs: normalized indicators of shrinking superlevel sets of |u|
  (and their differences, which asymptotically annihilate any fixed
  kernel) give attained Rayleigh quotients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lpspace import StepFunction, norm_p, normalized_indicator
from .measure import MeasureSpace, TailDescriptor, limsup_abs
from .operators import (
    MatrixOperator,
    MultiplicationOperator,
    mult_op,
    opnorm_estimate,
    opnorm_p1,
    p1_column_quotients,
)

__all__ = [
    "EssNormProblem",
    "LowerBoundCertificate",
    "WITNESS_PAIR",
    "PINCHING_DIAGONAL",
    "essential_norm",
    "diagonal_compactification",
    "pinching_lower_bound",
    "witness_sets",
    "witness_lower_bound",
    "perturbed_ratio",
    "verify_certificate",
    "qn_decay_profile",
    "best_diagonal_rank_k",
    "truncation_perturbation",
]

WITNESS_PAIR = "witness_pair"
PINCHING_DIAGONAL = "pinching_diagonal"


@dataclass(frozen=True, eq=False)
class EssNormProblem:
    """A multiplication symbol over a discretized space.

    ``u_diffuse`` holds the cell values of u (None for a purely atomic
    space); ``u_atom_values`` the values on the stored atoms; ``u_tail``
    the closed-form rule for atom values beyond the stored prefix (defaults
    to the space's own tail descriptor).
    """

    space: MeasureSpace
    u_diffuse: np.ndarray | None = None
    u_atom_values: np.ndarray = ()
    u_tail: TailDescriptor | None = None

    def __post_init__(self) -> None:
        atoms = np.asarray(self.u_atom_values, dtype=float)
        if atoms.size != self.space.n_atoms:
            raise ValueError(
                f"u has {atoms.size} atom values, space stores {self.space.n_atoms} atoms"
            )
        object.__setattr__(self, "u_atom_values", atoms)
        if self.space.has_diffuse:
            if self.u_diffuse is None:
                raise ValueError("space has a diffuse part but u_diffuse is missing")
            diff = np.asarray(self.u_diffuse, dtype=float)
            if diff.size != self.space.n_cells:
                raise ValueError(
                    f"u has {diff.size} cell values, space has {self.space.n_cells} cells"
                )
            object.__setattr__(self, "u_diffuse", diff)
        elif self.u_diffuse is not None:
            raise ValueError("u_diffuse given for a purely atomic space")
        if self.u_tail is None:
            object.__setattr__(self, "u_tail", self.space.atom_tail)

    def u_step(self) -> StepFunction:
        """The symbol as a step function (atoms first, then cells)."""
        coeffs = np.concatenate(
            [
                self.u_atom_values,
                self.u_diffuse if self.u_diffuse is not None else np.zeros(0),
            ]
        )
        return StepFunction(coeffs, self.space)


@dataclass(frozen=True, eq=False)
class LowerBoundCertificate:
    """A certified lower bound for |M_u + K| with the vector attaining it.

    ``construction`` records which route produced it: a witness_pair bound
    is the Rayleigh quotient of the stored witness under M_u + K itself; a
    pinching_diagonal bound is the exact L1 norm of the diagonal
    compression M_u + D_K, attained by the stored witness on that
    compressed operator.
    """

    bound: float
    witness: StepFunction
    construction: str


def essential_norm(problem: EssNormProblem) -> float:
    """Evaluate max(diffuse sup of |u|, limsup over the atom tail).

    The stored atom values never enter: a limsup is blind to finite
    prefixes, and at desk scale every stored coordinate can be cancelled by
    a finite-rank perturbation.
    """
    atomic_term = limsup_abs(problem.u_tail, problem.u_atom_values)
    if not problem.space.has_diffuse:
        return atomic_term
    diffuse_term = float(np.max(np.abs(problem.u_diffuse)))
    return max(diffuse_term, atomic_term)


def diagonal_compactification(K: MatrixOperator) -> MultiplicationOperator:
    """The multiplication operator D_K built from the diagonal scalars of K.

    d_n = K[n][n] is the unique scalar with P_n K P_n = d_n P_n, where P_n
    masks the n-th coordinate.  D_K coincides with the band projection of K
    onto the multiplication operators.
    """
    return MultiplicationOperator(K.diagonal, K.space)


def pinching_lower_bound(
    u: StepFunction, K: MatrixOperator, p: float = 1.0
) -> LowerBoundCertificate:
    """Lower bound |M_u + K| >= |M_u + D_K|, exact at p = 1.

    Compressing to the full coordinate diagonal is contractive and maps
    M_u + K to M_u + D_K; the bound is the exact L1 norm of the latter and
    the witness is the normalized indicator of the coordinate attaining it.
    """
    if float(p) != 1.0:
        raise ValueError(
            "pinching_lower_bound certifies at p = 1 only; "
            "use witness_lower_bound for general p"
        )
    if u.space != K.space:
        raise ValueError("u and K live on different spaces")
    compressed = MultiplicationOperator(u.coefficients + K.diagonal, u.space)
    quotients = p1_column_quotients(compressed)
    j = int(np.argmax(quotients))
    bound = float(quotients[j])
    witness = normalized_indicator(u.space, [j], 1.0)
    return LowerBoundCertificate(bound=bound, witness=witness, construction=PINCHING_DIAGONAL)


def witness_sets(u_diffuse: Sequence[float], eps: float) -> list[tuple[int, ...]]:
    """Descending superlevel witness sets A_1 contains A_2 contains ...

    A_1 is the set of cells with |u| strictly above max|u| - eps; each
    following set keeps the half with the largest |u| values (ties broken
    by cell index, so the construction is deterministic), which at least
    halves the mass at every step.  The list ends when a set is a single
    cell.  Indices are positions within the diffuse cell block.
    """
    values = np.abs(np.asarray(u_diffuse, dtype=float))
    if values.size == 0:
        raise ValueError("no diffuse cells to build witness sets from")
    m = float(np.max(values))
    eps = float(eps)
    if not 0.0 < eps < m:
        raise ValueError(f"eps must lie strictly between 0 and max|u| = {m}, got {eps}")
    threshold = m - eps
    selected = [i for i in range(values.size) if values[i] > threshold]
    # a maximizing cell always qualifies, so the superlevel set is nonempty
    selected.sort(key=lambda i: (-values[i], i))
    sets: list[tuple[int, ...]] = []
    current = selected
    while True:
        sets.append(tuple(sorted(current)))
        if len(current) == 1:
            break
        current = current[: len(current) // 2]
    return sets


def perturbed_ratio(u: StepFunction, K: MatrixOperator, g: StepFunction, p: float) -> float:
    """Rayleigh-type quotient |(M_u + K) g|_p / |g|_p."""
    y = u.coefficients * g.coefficients + K.matvec(g.coefficients)
    return norm_p(StepFunction(y, u.space), p) / norm_p(g, p)


def witness_lower_bound(
    u: StepFunction, K: MatrixOperator, eps: float, p: float
) -> LowerBoundCertificate:
    """Best attained quotient over witness indicators and their differences.

    Candidates are f_n = normalized indicator of A_n (unit p-norm) and all
    differences f_n - f_m with n < m; every candidate's quotient is a true
    lower bound for |M_u + K|, and for p = 1 the differences of deep
    witnesses annihilate fixed integral kernels, which is what drives the
    bound up to the diffuse sup of |u| under refinement.
    """
    if u.space != K.space:
        raise ValueError("u and K live on different spaces")
    space = u.space
    if not space.has_diffuse:
        raise ValueError("witness_lower_bound requires a diffuse part")
    na = space.n_atoms
    local_sets = witness_sets(u.coefficients[na:], eps)
    fns = [
        normalized_indicator(space, [na + i for i in s], p) for s in local_sets
    ]
    candidates = list(fns)
    for n in range(len(fns)):
        for m in range(n + 1, len(fns)):
            candidates.append(fns[n] - fns[m])
    best_ratio = -np.inf
    best_g = candidates[0]
    for g in candidates:
        r = perturbed_ratio(u, K, g, p)
        if r > best_ratio:
            best_ratio = r
            best_g = g
    return LowerBoundCertificate(bound=float(best_ratio), witness=best_g, construction=WITNESS_PAIR)


def verify_certificate(
    cert: LowerBoundCertificate,
    u: StepFunction,
    K: MatrixOperator,
    p: float,
    *,
    rtol: float = 1e-12,
) -> bool:
    """Check that a certificate is reproduced by its witness and is sound.

    witness_pair: recomputing the witness quotient must reproduce the bound
    (bit-exactly at p = 1, within ``rtol`` otherwise), and at p = 1 the
    bound must not exceed the exact norm of M_u + K (within ``rtol``; the
    quotient and the column-sum norm take different float paths).

    pinching_diagonal: the bound must equal the exact L1 norm of
    M_u + D_K, the witness must sit on a column attaining it, and the
    contractivity comparison against the exact norm of M_u + K holds with
    no tolerance at all (the compressed column sums are sub-sums of the
    full ones).
    """
    if cert.construction == WITNESS_PAIR:
        r = perturbed_ratio(u, K, cert.witness, p)
        if float(p) == 1.0:
            if r != cert.bound:
                return False
            full = opnorm_p1(mult_op(u) + K)
            return cert.bound <= full * (1.0 + rtol)
        if abs(r - cert.bound) > rtol * max(1.0, abs(cert.bound)):
            return False
        estimate = opnorm_estimate(mult_op(u) + K, p)
        return cert.bound <= estimate * (1.0 + rtol) + rtol
    if cert.construction == PINCHING_DIAGONAL:
        compressed = MultiplicationOperator(u.coefficients + K.diagonal, u.space)
        quotients = p1_column_quotients(compressed)
        if cert.bound != float(np.max(quotients)):
            return False
        support = np.nonzero(cert.witness.coefficients)[0]
        if support.size != 1 or quotients[support[0]] != cert.bound:
            return False
        return cert.bound <= opnorm_p1(mult_op(u) + K)
    raise ValueError(f"unknown certificate construction {cert.construction!r}")


def qn_decay_profile(K: MatrixOperator, n_max: int | None = None) -> list[float]:
    """Exact L1 norms of Q_n K for n = 0..n_max, Q_n zeroing the first n
    coordinates.

    The profile witnesses the vanishing of tail compressions: at
    n = dimension the value is 0 exactly, and for kernels with summable
    columns the decay follows the tail sums in closed form.
    """
    dim = K.dimension
    if n_max is None:
        n_max = dim
    n_max = int(n_max)
    if not 0 <= n_max <= dim:
        raise ValueError(f"n_max must lie in [0, {dim}], got {n_max}")
    out = []
    for n in range(n_max + 1):
        masked = K.entries.copy()
        masked[:n, :] = 0.0
        out.append(opnorm_p1(MatrixOperator(masked, K.space)))
    return out


def best_diagonal_rank_k(u_values: Sequence[float], k: int) -> float:
    """inf over diagonal perturbations on <= k coordinates of max_i |u_i + d_i|.

    Equals the (k+1)-th largest of the |u_i|: the k largest can be
    cancelled outright, and no k-coordinate support can touch the
    (k+1)-th largest.  Returns 0 when k >= number of values.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be >= 0")
    values = np.sort(np.abs(np.asarray(u_values, dtype=float)))[::-1]
    if k >= values.size:
        return 0.0
    return float(values[k])


def truncation_perturbation(u: StepFunction, n: int) -> MultiplicationOperator:
    """The explicit compact perturbation K = -M_u (I - Q_n).

    Cancels u on the first n coordinates, so M_u + K is multiplication by
    the tail of u; its exact L1 norm sup_{i > n} |u_i| certifies the
    essential norm from above at any finite truncation.
    """
    n = int(n)
    if not 0 <= n <= u.space.dimension:
        raise ValueError(f"n must lie in [0, {u.space.dimension}], got {n}")
    d = np.zeros(u.space.dimension)
    d[:n] = -u.coefficients[:n]
    return MultiplicationOperator(d, u.space)
