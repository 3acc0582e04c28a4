"""Unitary DFT and the two phase-retrieval constraint sets.

Complex signals in C^N are stored as real vectors of length 2N with real and
imaginary parts interleaved: ``(Re x0, Im x0, Re x1, Im x1, ...)``.  With
this identification the Euclidean norm on R^2N equals the Hermitian norm.

The forward transform uses the kernel ``exp(+2 pi i t w / N) / sqrt(N)``.
"""
from __future__ import annotations

import numpy as np

from .errors import StructuralError
from .geometry import as_vector
from .sets import ProjectableSet

__all__ = [
    "to_complex",
    "to_real",
    "dft",
    "idft",
    "FourierMagnitudeSet",
    "SupportSet",
    "project_fourier_magnitude",
    "project_support",
]


def to_complex(x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 1 or x.size % 2:
        raise StructuralError("interleaved complex vectors need even length")
    return x.view(np.complex128).copy()


def to_real(z) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return z.view(float).copy()


def dft(z) -> np.ndarray:
    """``zhat(w) = N^-1/2 sum_t exp(2 pi i t w / N) z(t)``."""
    # numpy's ifft carries the +i kernel; "ortho" gives the 1/sqrt(N) scaling
    return np.fft.ifft(np.asarray(z, dtype=np.complex128), norm="ortho")


def idft(zhat) -> np.ndarray:
    """Inverse of :func:`dft`."""
    return np.fft.fft(np.asarray(zhat, dtype=np.complex128), norm="ortho")


def project_fourier_magnitude(amplitude, x) -> np.ndarray:
    """Project onto ``{x : |xhat(w)| = a(w) for all w}``.

    Each Fourier coefficient is rescaled to modulus ``a(w)``; a vanishing
    coefficient is replaced by ``a(w)`` itself (phase 1).
    """
    a = np.asarray(amplitude, dtype=float)
    x = as_vector(x)
    if x.size != 2 * a.size:
        raise StructuralError(f"amplitude length {a.size} does not match signal length {x.size // 2}")
    xh = dft(to_complex(x))
    mag = np.abs(xh)
    phase = np.ones_like(xh)
    nz = mag > 0
    phase[nz] = xh[nz] / mag[nz]
    return as_vector(to_real(idft(a * phase)))


class FourierMagnitudeSet(ProjectableSet):
    """Signals whose unitary DFT has prescribed modulus ``amplitude``."""

    def __init__(self, amplitude):
        a = np.array(amplitude, dtype=float).reshape(-1)
        if a.size == 0 or np.any(a < 0) or not np.all(np.isfinite(a)):
            raise StructuralError("amplitude must be a nonempty, finite, nonnegative array")
        a.flags.writeable = False
        self.amplitude = a
        self.n = a.size
        self.dim = 2 * a.size

    def project(self, x):
        return project_fourier_magnitude(self.amplitude, x)

    def residual(self, x) -> float:
        """``max_w | |xhat(w)| - a(w) |``."""
        xh = dft(to_complex(self._check(x)))
        return float(np.max(np.abs(np.abs(xh) - self.amplitude)))

    def extinctions(self, x) -> int:
        """Number of Fourier coefficients of `x` that vanish exactly."""
        xh = dft(to_complex(self._check(x)))
        return int(np.count_nonzero(xh == 0))


def project_support(mask, x) -> np.ndarray:
    """Zero every sample (real and imaginary part) outside `mask`."""
    m = np.asarray(mask, dtype=bool).reshape(-1)
    x = as_vector(x)
    if x.size != 2 * m.size:
        raise StructuralError(f"mask length {m.size} does not match signal length {x.size / 2}")
    return as_vector(np.where(np.repeat(m, 2), x, 0.0))


class SupportSet(ProjectableSet):
    """Signals supported on the index set where `mask` is true."""

    def __init__(self, mask):
        m = np.array(mask, dtype=bool).reshape(-1)
        if m.size == 0:
            raise StructuralError("empty mask")
        m.flags.writeable = False
        self.mask = m
        self.dim = 2 * m.size

    def project(self, x):
        return project_support(self.mask, x)
