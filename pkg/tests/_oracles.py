"""Independent test oracles: brute-force enumeration, LP feasibility, finite differences.

Everything here checks library results through a different route than the
code under test (angular sweeps instead of binomial sums, LP feasibility
instead of closed forms, finite differences instead of analytic gradients).
"""

import numpy as np
from scipy.optimize import linprog

from landscape.network import NetParams, mse


def count_dichotomies_sweep_2d(X):
    """Exact number of strict sign vectors sign(w . X), w in R^2, by angular sweep."""
    angles = np.arctan2(X[1], X[0])
    boundaries = np.sort(np.unique(
        np.concatenate([angles + np.pi / 2, angles - np.pi / 2]) % (2 * np.pi)
    ))
    mids = (boundaries + np.roll(boundaries, -1)) / 2
    mids[-1] = (boundaries[-1] + boundaries[0] + 2 * np.pi) / 2
    patterns = set()
    for t in mids:
        s = np.sign(np.array([np.cos(t), np.sin(t)]) @ X)
        if np.all(s != 0):
            patterns.add(tuple(s.astype(int)))
    return len(patterns)


def count_dichotomies_lp(X, tol=1e-7):
    """Strict sign vectors counted by one margin-maximizing LP per candidate."""
    d0, N = X.shape
    count = 0
    for mask in range(2 ** N):
        h = np.array([1.0 if (mask >> n) & 1 else -1.0 for n in range(N)])
        A_ub = np.hstack([-(h[:, None] * X.T), np.ones((N, 1))])
        res = linprog(c=[0.0] * d0 + [-1.0], A_ub=A_ub, b_ub=np.zeros(N),
                      bounds=[(-1, 1)] * d0 + [(0, 1)], method="highs")
        if res.status == 0 and -res.fun > tol:
            count += 1
    return count


def margin_conditioned_columns(d0, n_cols, sin_alpha, w_unit, seed):
    """Gaussian columns rejection-sampled to satisfy |cos(x, w)| > sin_alpha."""
    rng = np.random.default_rng(seed)
    cols = []
    while len(cols) < n_cols:
        x = rng.standard_normal(d0)
        if abs(x @ w_unit) / np.linalg.norm(x) > sin_alpha:
            cols.append(x)
    return np.column_stack(cols)


def fd_gradient(params, data, h=1e-6):
    """Central finite-difference gradient of the mean squared error."""
    W, z, rho = params.W, params.z, params.rho
    gW = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            Wp = W.copy(); Wp[i, j] += h
            Wm = W.copy(); Wm[i, j] -= h
            gW[i, j] = (mse(NetParams(Wp, z, rho), data)
                        - mse(NetParams(Wm, z, rho), data)) / (2 * h)
    gz = np.zeros_like(z)
    for i in range(z.shape[0]):
        zp = z.copy(); zp[i] += h
        zm = z.copy(); zm[i] -= h
        gz[i] = (mse(NetParams(W, zp, rho), data)
                 - mse(NetParams(W, zm, rho), data)) / (2 * h)
    return gW, gz


def three_sigma(p, trials):
    """3-sigma binomial half-width at hit probability p."""
    return 3.0 * np.sqrt(p * (1.0 - p) / trials)
