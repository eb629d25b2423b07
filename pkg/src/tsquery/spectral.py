"""Discrete Fourier transform machinery and signal identities.

All transforms use the unitary convention: a factor of 1/sqrt(n) in front of
both the forward and the inverse transform. Under this convention Parseval's
relation and Euclidean-distance preservation hold exactly, and the
convolution theorem reads dft(conv(x, y)) = sqrt(n) * (X * Y).
"""

import numpy as np
from scipy.linalg import circulant

from .errors import InvalidInputError, NumericConsistencyError

TWO_PI = 2.0 * np.pi


def as_signal(values) -> np.ndarray:
    """Validate and coerce a real-valued signal to a float64 array.

    Raises InvalidInputError for empty input, non-1-D shapes, or
    non-finite values.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"signal must be one-dimensional, got shape {x.shape}")
    if x.size < 1:
        raise InvalidInputError("signal must contain at least one sample")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("signal contains non-finite values")
    return x


def as_spectrum(coeffs) -> np.ndarray:
    """Validate and coerce a coefficient vector to a complex128 array."""
    X = np.asarray(coeffs, dtype=np.complex128)
    if X.ndim != 1:
        raise InvalidInputError(f"spectrum must be one-dimensional, got shape {X.shape}")
    if X.size < 1:
        raise InvalidInputError("spectrum must contain at least one coefficient")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("spectrum contains non-finite values")
    return X


def dft(x) -> np.ndarray:
    """Unitary discrete Fourier transform.

    X_f = (1/sqrt(n)) * sum_t x_t exp(-j 2 pi t f / n)

    O(n log n) for any length via the FFT backend; arbitrary (including
    prime) lengths are supported.
    """
    x = as_signal(x)
    return np.fft.fft(x, norm="ortho")


def idft(X) -> np.ndarray:
    """Unitary inverse DFT, returning a real signal.

    x_t = (1/sqrt(n)) * sum_f X_f exp(+j 2 pi t f / n)

    The imaginary residue of each output sample must stay below
    1e-9 * (1 + max|X|); larger residues raise NumericConsistencyError
    (they indicate the spectrum does not come from a real signal).
    """
    X = as_spectrum(X)
    out = np.fft.ifft(X, norm="ortho")
    tol = 1e-9 * (1.0 + float(np.max(np.abs(X))))
    resid = float(np.max(np.abs(out.imag)))
    if resid >= tol:
        raise NumericConsistencyError(
            f"inverse DFT imaginary residue {resid:.3e} exceeds tolerance {tol:.3e}"
        )
    return out.real


def energy(x) -> float:
    """Signal energy sum(|x_i|^2); identical in time and frequency domain."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        x = as_spectrum(x)
    else:
        x = as_signal(x)
    return float(np.sum(np.abs(x) ** 2))


def circular_convolution(x, y) -> np.ndarray:
    """Circular convolution: out_i = sum_k x_k * y_{(i-k) mod n}.

    Evaluated directly from the definition (circulant matrix product), so
    it is independent of the FFT path and usable as its oracle.
    """
    x = as_signal(x)
    y = as_signal(y)
    if x.size != y.size:
        raise InvalidInputError(f"length mismatch: {x.size} != {y.size}")
    return circulant(y) @ x


def euclidean_distance(x, y) -> float:
    """Euclidean distance sqrt(sum |x_i - y_i|^2) between equal-length vectors.

    Accepts signals or spectra; by Parseval the two give the same value for
    corresponding inputs.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if np.iscomplexobj(x) or np.iscomplexobj(y):
        x = as_spectrum(x)
        y = as_spectrum(y)
    else:
        x = as_signal(x)
        y = as_signal(y)
    if x.size != y.size:
        raise InvalidInputError(f"length mismatch: {x.size} != {y.size}")
    return float(np.sqrt(np.sum(np.abs(x - y) ** 2)))


def energy_greedy_order(n: int) -> np.ndarray:
    """Coefficient order [0, 1, n-1, 2, n-2, ...].

    Real signals have conjugate-symmetric spectra, so this order front-loads
    the typically largest coefficients (the low frequencies and their
    mirrors), which is what early-abandoning distance accumulation wants.
    """
    order = [0]
    for i in range(1, n // 2 + 1):
        order.append(i)
        if n - i != i:
            order.append(n - i)
    return np.array(order, dtype=np.intp)


def wrap_angle(theta):
    """Wrap angle(s) into [-pi, pi).

    Values already in range pass through unchanged (bit-exact), so applying
    an identity transformation never perturbs stored angles.
    """
    theta = np.asarray(theta, dtype=np.float64)
    wrapped = np.mod(theta + np.pi, TWO_PI) - np.pi
    # rounding in the mod can land exactly on +pi; fold it back
    wrapped = np.where(wrapped >= np.pi, wrapped - TWO_PI, wrapped)
    out = np.where((theta >= -np.pi) & (theta < np.pi), theta, wrapped)
    return out if out.ndim else float(out)


def angle(z):
    """Phase angle in [-pi, pi), with angle(0) defined as 0."""
    z = np.asarray(z, dtype=np.complex128)
    out = wrap_angle(np.angle(z))
    out = np.where(np.abs(z) == 0.0, 0.0, out)
    return out if out.ndim else float(out)
