"""Periodic pseudo-spectral primitives on the 2-pi torus.

Fields are real samples on the uniform grid x_j = -pi + j*(2*pi/n), n even.
Mode arrays use the rfft layout (k = 0..n/2) but always hold the true
Fourier coefficients c_k of the underlying function, i.e. the phase induced
by starting the grid at -pi is corrected in both directions.

Conventions fixed here and relied on everywhere else:

* Hilbert transform: multiplier -i*sgn(k), zero on the mean.  With this
  sign H(sin k a) = -cos(k a) for k >= 1 and the bending operator
  H(d^3/da^3)/(4 s^3) has symbol -|k|^3/(4 s^3), i.e. it dissipates.
* Homogeneous Sobolev seminorm: ||f||_{gamma}^2 = 2*pi * sum_{k != 0}
  |k|^(2*gamma) |c_k|^2 (so gamma = 0 gives the plain L2 norm of the
  mean-free part).
* The Nyquist mode is zeroed after odd-order derivatives and after the
  Hilbert transform (its sign is ambiguous on the real grid).
* Products that feed further derivatives are dealiased by 3/2 zero padding.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi


def grid_points(n: int) -> np.ndarray:
    """Sample locations -pi + j*2*pi/n, j = 0..n-1."""
    _check_even(n)
    return -np.pi + TWO_PI * np.arange(n) / n


def _check_even(n):
    if n < 2 or n % 2:
        raise ValueError(f"grid size must be even and positive, got {n}")


@lru_cache(maxsize=32)
def _phase(n):
    # rfft of samples starting at -pi picks up (-1)^k per mode
    k = np.arange(n // 2 + 1)
    return np.where(k % 2 == 0, 1.0, -1.0)


def to_modes(f: np.ndarray) -> np.ndarray:
    """True Fourier coefficients c_k, k = 0..n/2, of real samples f."""
    n = f.shape[-1]
    _check_even(n)
    return np.fft.rfft(f, axis=-1) * (_phase(n) / n)


def from_modes(c: np.ndarray, n: int) -> np.ndarray:
    """Inverse of to_modes."""
    return np.fft.irfft(c * _phase(n) * n, n, axis=-1)


def wavenumbers(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1, dtype=float)


def derivative(f: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative; Nyquist zeroed for odd orders."""
    if order < 1:
        raise ValueError("derivative order must be a positive integer")
    n = f.shape[-1]
    c = to_modes(f)
    c *= (1j * wavenumbers(n)) ** order
    if order % 2:
        c[..., -1] = 0.0
    return from_modes(c, n)


def hilbert(f: np.ndarray) -> np.ndarray:
    """Periodic Hilbert transform, multiplier -i*sgn(k); kills the mean."""
    n = f.shape[-1]
    c = to_modes(f)
    c *= -1j
    c[..., 0] = 0.0
    c[..., -1] = 0.0
    return from_modes(c, n)


def mean(f: np.ndarray) -> float:
    return float(np.mean(f))


def project_zero_mean(f: np.ndarray) -> np.ndarray:
    return f - np.mean(f, axis=-1, keepdims=True)


@lru_cache(maxsize=32)
def _dealias_size(n):
    m = (3 * n) // 2
    return m + (m % 2)


def dealiased_product(a: np.ndarray, b: np.ndarray, enabled: bool = True) -> np.ndarray:
    """Pointwise product with 3/2-rule zero padding (2/3 of modes kept exact).

    With enabled=False this is a plain sample product.
    """
    if not enabled:
        return a * b
    n = a.shape[-1]
    m = _dealias_size(n)

    def up(x):
        pad_x = np.zeros(x.shape[:-1] + (m // 2 + 1,), dtype=complex)
        pad_x[..., : n // 2 + 1] = to_modes(x)
        return from_modes(pad_x, m)

    cm = to_modes(up(a) * up(b))[..., : n // 2 + 1]
    cm[..., -1] = 0.0
    return from_modes(cm, n)


def cumulative_from_start(f: np.ndarray) -> np.ndarray:
    """Antiderivative of a mean-free field, vanishing at the first sample.

    Returns samples of F(x) = int_{-pi}^x f dx' for f with zero mean; the
    mean is removed defensively (callers pass mean-free data).
    """
    n = f.shape[-1]
    c = to_modes(project_zero_mean(f))
    k = wavenumbers(n)
    k[0] = 1.0
    c = c / (1j * k)
    c[..., 0] = 0.0
    c[..., -1] = 0.0
    out = from_modes(c, n)
    return out - out[..., :1]


def sobolev_seminorm(f: np.ndarray, gamma: float) -> float:
    """Homogeneous Sobolev seminorm, 2*pi sum_{k!=0} |k|^(2 gamma) |c_k|^2."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    n = f.shape[-1]
    c = to_modes(f)
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 0.0
    w[-1] = 1.0
    k = wavenumbers(n)
    k[0] = 1.0
    return float(np.sqrt(TWO_PI * np.sum(w * k ** (2.0 * gamma) * np.abs(c) ** 2)))


def hilbert_commutator(psi: np.ndarray, f: np.ndarray, dealias: bool = True) -> np.ndarray:
    """[H, psi] f = H(psi f) - psi H(f), products dealiased.

    psi may be vector valued with shape (..., n); f has shape (n,).
    """
    pf = dealiased_product(psi, f, dealias)
    return hilbert(pf) - dealiased_product(psi, hilbert(f), dealias)


def _phase_basis(n: int, x: np.ndarray) -> np.ndarray:
    """e^{i k x} for k = 0..n/2 by recurrence (much cheaper than outer exp)."""
    x = np.atleast_1d(np.asarray(x, float))
    basis = np.empty((n // 2 + 1, x.size), dtype=complex)
    basis[0] = 1.0
    step = np.exp(1j * x)
    for k in range(1, n // 2 + 1):
        np.multiply(basis[k - 1], step, out=basis[k])
    return basis


def eval_series(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of samples f at points x.

    Direct O(n) summation per point; exact to rounding for band-limited
    fields.  f may be a stack (..., n); result has shape f.shape[:-1] + x.shape.
    """
    n = f.shape[-1]
    c = to_modes(f)
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    out = np.real((c * w) @ _phase_basis(n, x))
    return out.reshape(f.shape[:-1] + np.shape(x))


class TrigEvaluator:
    """Caches the evaluation basis for repeated off-grid interpolation."""

    def __init__(self, n: int, x: np.ndarray):
        self.n = n
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self._basis = w[:, None] * _phase_basis(n, x)

    def __call__(self, f: np.ndarray) -> np.ndarray:
        return np.real(to_modes(f) @ self._basis)


def implicit_factor(n: int, dt: float, operator: str, perim: float = 1.0,
                    coeff: float = 1.0) -> np.ndarray:
    """Backward-Euler resolvent factors per mode for the two linear operators.

    bending:    1 / (1 + dt * coeff * |k|^3 / (4 perim^3))
    stretching: 1 / (1 + dt * coeff * |k| / 4)
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    k = wavenumbers(n)
    if operator == "bending":
        if perim <= 0.0:
            raise ValueError(f"perimeter must be positive, got {perim}")
        sym = coeff * k ** 3 / (4.0 * perim ** 3)
    elif operator == "stretching":
        sym = coeff * k / 4.0
    else:
        raise ValueError(f"unknown operator {operator!r}")
    return 1.0 / (1.0 + dt * sym)


def implicit_linear_step(modes: np.ndarray, dt: float, operator: str,
                         perim: float = 1.0, coeff: float = 1.0) -> np.ndarray:
    """One backward-Euler solve of m_t = L m in mode space (rfft layout)."""
    n = 2 * (modes.shape[-1] - 1)
    return modes * implicit_factor(n, dt, operator, perim, coeff)


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the torus; coordinate is 'alpha' (arc length) or 's'."""

    n: int
    coordinate: str = "alpha"

    def __post_init__(self):
        _check_even(self.n)
        if self.coordinate not in ("alpha", "s"):
            raise ValueError(f"unknown coordinate label {self.coordinate!r}")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.n)


@dataclass
class SpectralField:
    """A real periodic field with its Fourier-mode view."""

    grid: PeriodicGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.grid.n,):
            raise ValueError("sample count does not match grid")

    @classmethod
    def from_samples(cls, samples, coordinate: str = "alpha") -> "SpectralField":
        samples = np.asarray(samples, dtype=float)
        return cls(PeriodicGrid(samples.size, coordinate), samples)

    @property
    def modes(self) -> np.ndarray:
        return to_modes(self.samples)

    def with_samples(self, samples) -> "SpectralField":
        return SpectralField(self.grid, np.asarray(samples, dtype=float))

    def derivative(self, order: int = 1) -> "SpectralField":
        return self.with_samples(derivative(self.samples, order))

    def hilbert(self) -> "SpectralField":
        return self.with_samples(hilbert(self.samples))

    def seminorm(self, gamma: float) -> float:
        return sobolev_seminorm(self.samples, gamma)

    @property
    def mean(self) -> float:
        return mean(self.samples)


def spectral_transform(f: "SpectralField | np.ndarray", direction: str = "forward"):
    """Exact discrete Fourier pair on a SpectralField or raw samples.

    forward returns the coefficient array c_k (rfft layout, true
    coefficients); inverse expects such an array plus is only defined via
    SpectralField round trips, so raw arrays are interpreted accordingly.
    """
    if direction == "forward":
        samples = f.samples if isinstance(f, SpectralField) else np.asarray(f, float)
        return to_modes(samples)
    if direction == "inverse":
        c = np.asarray(f, dtype=complex)
        n = 2 * (c.shape[-1] - 1)
        return from_modes(c, n)
    raise ValueError(f"unknown direction {direction!r}")
