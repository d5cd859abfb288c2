"""First-order stationarity checks and the exact subset rank condition.

A differentiable local minimum of the MSE must satisfy (A o X) e = 0 where
A is the activation pattern, o the column-wise Kronecker product and e the
residual.  This module measures that residual condition, tests membership
in an open activation region, and provides the brute-force subset oracle
for when the product A o X has full column rank.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InstanceTooLarge
from .linalg import numerical_rank
from .network import (
    DEFAULT_TAU,
    activation_slopes,
    gradient,
    khatri_rao,
)

# 2^22 subsets is the largest enumeration the oracle will attempt.
MAX_ORACLE_SAMPLES = 22


@dataclass
class StationarityReport:
    residual_norm: float        # ||(A o X) e||
    gradient_norm: float        # full parameter-gradient norm
    min_neural_input: float     # min_{i,n} |w_i . x_n|
    boundary_hits: int          # pre-activations within tau of zero


def dlm_condition(params, data, tau=DEFAULT_TAU):
    """Evaluate the first-order residual condition at (W, z) on the dataset."""
    X, y = data.X, data.y
    P = params.W @ X
    A = activation_slopes(P, params.rho)
    e = y - (P * A).T @ params.z
    G = khatri_rao(A, X)
    dW, dz = gradient(params, data)
    return StationarityReport(
        residual_norm=float(np.linalg.norm(G @ e)),
        gradient_norm=float(np.sqrt(np.sum(dW * dW) + dz @ dz)),
        min_neural_input=float(np.min(np.abs(P))) if P.size else float("inf"),
        boundary_hits=int(np.sum(np.abs(P) <= tau)),
    )


def region_membership(W, X, pattern):
    """True iff a(WX) reproduces the pattern exactly and no entry is on the boundary.

    Activation regions are open sets, so a pre-activation within tau of
    zero excludes membership regardless of the pattern.
    """
    P = np.asarray(W, dtype=float) @ np.asarray(X, dtype=float)
    if np.any(np.abs(P) <= pattern.tau):
        return False
    return bool(np.array_equal(activation_slopes(P, pattern.rho), pattern.A))


def rank_condition_oracle(A, X, rel_tol=1e-10):
    """Exhaustively test |S| <= rank(A_S) * d0 over every nonempty subset S.

    Returns (holds, witness): witness is None when the condition holds,
    otherwise the lexicographically first violating subset of minimum size.

    Raises
    ------
    InstanceTooLarge
        If the instance has more than 22 columns.
    """
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    d0 = X.shape[0]
    N = A.shape[1]
    if N > MAX_ORACLE_SAMPLES:
        raise InstanceTooLarge(f"subset enumeration capped at N = {MAX_ORACLE_SAMPLES}")
    for size in range(1, N + 1):
        for S in combinations(range(N), size):
            sub = A[:, S]
            # rank >= 1 already settles subsets of at most d0 columns
            if size <= d0 and np.any(sub != 0.0):
                continue
            if size > numerical_rank(sub, rel_tol) * d0:
                return False, tuple(S)
    return True, None
