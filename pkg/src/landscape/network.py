"""One-hidden-layer leaky-ReLU network: forward pass, losses, patterns, gradients.

The model has no biases and a single scalar output per sample.  Data is
kept column-per-sample: X is (d0, N), labels y in {0, 1}^N.  The first
layer is W (d1, d0), the second z (d1,), and the unit is
f(u) = u for u > 0 and rho * u for u < 0 with rho != 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch

# Pre-activations within this band of zero are flagged as non-differentiable.
DEFAULT_TAU = 1e-9


@dataclass
class NetParams:
    """First-layer weights W (d1, d0), output weights z (d1,), leak rho."""

    W: np.ndarray
    z: np.ndarray
    rho: float

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.rho == 1.0:
            raise ValueError("rho = 1 makes the unit linear; the model requires rho != 1")
        if self.W.ndim != 2 or self.z.ndim != 1 or self.W.shape[0] != self.z.shape[0]:
            raise ShapeMismatch("W must be (d1, d0) and z (d1,)")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.z))):
            raise ValueError("non-finite parameter entries")

    @property
    def d1(self):
        return self.W.shape[0]

    @property
    def d0(self):
        return self.W.shape[1]


@dataclass
class Dataset:
    """Input matrix X (d0, N), one sample per column, binary labels y (N,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[1] != self.y.shape[0]:
            raise ShapeMismatch("X must be (d0, N) and y (N,)")
        if self.y.shape[0] < 1:
            raise ValueError("dataset needs at least one sample")
        if not np.all((self.y == 0.0) | (self.y == 1.0)):
            raise ValueError("labels must be exactly 0 or 1")

    @property
    def n_samples(self):
        return self.X.shape[1]

    @property
    def d0(self):
        return self.X.shape[0]


@dataclass
class ActivationPattern:
    """Slope matrix A in {rho, 1}^(d1 x N) plus flags for near-zero pre-activations.

    A zero pre-activation gets slope 1 and a raised flag: the activation
    derivative is undefined there and callers may want to know.
    """

    A: np.ndarray
    nondiff_mask: np.ndarray
    rho: float
    tau: float = field(default=DEFAULT_TAU)


def lrelu(U, rho):
    """Elementwise leaky rectifier: u for u > 0, rho * u for u < 0, 0 at 0."""
    if rho == 1.0:
        raise ValueError("rho must differ from 1")
    U = np.asarray(U, dtype=float)
    return np.where(U > 0.0, U, rho * U)


def activation_slopes(P, rho):
    """Slope matrix of the rectifier at pre-activations P, with slope 1 at zero."""
    return np.where(np.asarray(P) >= 0.0, 1.0, rho)


def activation_pattern(W, X, rho, tau=DEFAULT_TAU):
    """Pattern a(WX) with entries in {rho, 1} and |WX| <= tau entries flagged."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    P = np.asarray(W, dtype=float) @ np.asarray(X, dtype=float)
    return ActivationPattern(
        A=activation_slopes(P, rho),
        nondiff_mask=np.abs(P) <= tau,
        rho=rho,
        tau=tau,
    )


def forward(params, X):
    """Network output on every sample: f(WX)^T z as a length-N vector."""
    H = lrelu(params.W @ np.asarray(X, dtype=float), params.rho)
    return H.T @ params.z


def residual(params, data):
    """Residual e = y - forward(params, X)."""
    return data.y - forward(params, data.X)


def mse(params, data):
    """Mean square error (1/N) ||y - yhat||^2."""
    e = residual(params, data)
    return float(e @ e) / data.n_samples


def mce(params, data):
    """Fraction misclassified at output threshold 0.5; a tie predicts class 1."""
    yhat = forward(params, data.X)
    predicted_one = yhat >= 0.5
    actual_one = data.y == 1.0
    return float(np.mean(predicted_one != actual_one))


def khatri_rao(A, X):
    """Column-wise Kronecker product: column n is a_n (x) x_n, shape (d0*d1, N)."""
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    if A.ndim != 2 or X.ndim != 2 or A.shape[1] != X.shape[1]:
        raise ShapeMismatch("A and X must be matrices with equal column counts")
    d0 = X.shape[0]
    d1 = A.shape[0]
    return np.repeat(A, d0, axis=0) * np.tile(X, (d1, 1))


def gradient(params, data):
    """Analytic MSE gradient (dW, dz) with slope 1 at zero pre-activations.

    dW_i = -(2/N) z_i sum_n a_in e_n x_n and dz = -(2/N) f(WX) e.
    """
    X, y = data.X, data.y
    N = data.n_samples
    P = params.W @ X
    A = activation_slopes(P, params.rho)
    H = P * A
    e = y - H.T @ params.z
    dz = -(2.0 / N) * (H @ e)
    dW = -(2.0 / N) * ((params.z[:, None] * A * e[None, :]) @ X.T)
    return dW, dz
