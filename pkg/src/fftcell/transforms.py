"""DFT with the mean-carrying normalization used throughout this package,
trigonometric interpolation/truncation and discrete Sobolev norms.

Conventions
-----------
The forward transform carries the ``1/|N|`` factor:

    u_hat(k) = (1/|N|) sum_m u(x^m) exp(-2 pi i sum_a k_a m_a / N_a),

so the inverse is the plain exponential sum.  The continuous basis function
attached to index ``k`` is ``phi_k(x) = exp(i pi <xi(k), x>)`` with
``xi(k) = k / Y``; at the grid points ``phi_k(x^m)`` reduces to the DFT
kernel, which is why ``numpy.fft`` applies verbatim on shift-stored arrays.
Grids are odd, so Hermitian symmetry of real data is preserved exactly on
the reduced lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .grid import (
    GridSpec,
    frequency,
    frequency_grid,
    grid_point,
    in_lattice,
    index_to_slot,
    iter_lattice,
    underlined_frequency_grid,
)


@dataclass(frozen=True)
class GridField:
    """Real d-vector field sampled on the grid, component-major ``(d, *N)``."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        expected = (self.spec.dim,) + self.spec.shape
        if v.shape != expected:
            raise ValueError(f"values shape {v.shape} != expected {expected}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros((spec.dim,) + spec.shape))

    @classmethod
    def constant(cls, spec, vec):
        vec = np.asarray(vec, dtype=float)
        values = np.broadcast_to(
            vec.reshape((spec.dim,) + (1,) * spec.dim), (spec.dim,) + spec.shape
        ).copy()
        return cls(spec, values)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a trigonometric polynomial, ``(d, *N)`` complex.

    Hermitian symmetry ``coeff(-k) = conj(coeff(k))`` is expected but not
    enforced at construction; :func:`dft_inverse` checks it through the
    imaginary-residue guard.
    """

    spec: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        expected = (self.spec.dim,) + self.spec.shape
        if c.shape != expected:
            raise ValueError(f"coeffs shape {c.shape} != expected {expected}")
        object.__setattr__(self, "coeffs", c)


def _grid_axes(spec):
    return tuple(range(1, spec.dim + 1))


def dft_forward(u: GridField) -> SpectralField:
    """Forward DFT, ``u_hat(k) = (1/|N|) sum_m u(x^m) w^{-km}``."""
    coeffs = np.fft.fftn(u.values, axes=_grid_axes(u.spec)) / u.spec.total
    return SpectralField(u.spec, coeffs)


def dft_inverse(s: SpectralField) -> GridField:
    """Inverse DFT; rejects inputs whose imaginary residue exceeds tolerance."""
    raw = np.fft.ifftn(s.coeffs, axes=_grid_axes(s.spec)) * s.spec.total
    real = raw.real
    scale = max(1.0, float(np.max(np.abs(real))) if real.size else 1.0)
    residue = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
    if residue > tolerances.IMAG_RESIDUE * scale:
        raise ValueError(
            f"non-Hermitian spectral data: imaginary residue {residue:.3e} "
            f"exceeds {tolerances.IMAG_RESIDUE:.1e} * {scale:.3e}"
        )
    return GridField(s.spec, real)


def interpolate(f, spec: GridSpec) -> GridField:
    """Sample a continuous d-vector function at the grid points.

    Together with :func:`trig_eval` this realizes the interpolation
    projection onto trigonometric polynomials.
    """
    values = np.empty((spec.dim,) + spec.shape)
    for k in iter_lattice(spec):
        slot = index_to_slot(spec, k)
        sample = np.asarray(f(grid_point(spec, k)), dtype=float).reshape(spec.dim)
        values[(slice(None),) + slot] = sample
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite sample encountered during interpolation")
    return GridField(spec, values)


def truncate(fourier_coeffs, spec: GridSpec) -> SpectralField:
    """Keep exactly the modes inside the reduced lattice, discard the rest.

    ``fourier_coeffs`` maps integer index tuples (over any finite set) to
    complex d-vectors.
    """
    coeffs = np.zeros((spec.dim,) + spec.shape, dtype=complex)
    for k, vec in fourier_coeffs.items():
        if in_lattice(spec, k):
            coeffs[(slice(None),) + index_to_slot(spec, k)] = np.asarray(
                vec, dtype=complex
            ).reshape(spec.dim)
    return SpectralField(spec, coeffs)


def trig_eval(s: SpectralField, x) -> np.ndarray:
    """Evaluate ``sum_k u_hat(k) phi_k(x)`` at an arbitrary point; real output."""
    x = np.asarray(x, dtype=float).reshape(s.spec.dim)
    total = np.zeros(s.spec.dim, dtype=complex)
    for k in iter_lattice(s.spec):
        slot = index_to_slot(s.spec, k)
        phase = np.exp(1j * np.pi * float(frequency(s.spec, k) @ x))
        total += s.coeffs[(slice(None),) + slot] * phase
    scale = max(1.0, float(np.max(np.abs(total.real))))
    if float(np.max(np.abs(total.imag))) > tolerances.IMAG_RESIDUE * scale:
        raise ValueError("non-Hermitian spectral data: complex point value")
    return total.real


def sobolev_norm(s: SpectralField, order: float) -> float:
    """Discrete H^s norm ``(sum_k |xi_(k)|^{2s} |u_hat(k)|^2)^{1/2}``.

    Uses the underlined frequency (the all-ones vector) at k = 0, so for
    d > 1 the constant mode is weighted by ``d^{s/2}``; see the README note
    on the constant-mode weight.
    """
    if order < 0:
        raise ValueError(f"Sobolev order must be >= 0, got {order}")
    xiu = underlined_frequency_grid(s.spec)
    weight = np.sum(xiu**2, axis=0) ** order
    energy = np.sum(np.abs(s.coeffs) ** 2, axis=0)
    return float(np.sqrt(np.sum(weight * energy)))


def l2_inner(u: GridField, v: GridField) -> float:
    """Discrete mean inner product ``(1/|N|) sum_k <u^k, v^k>``.

    Equals the L2 inner product of the corresponding trigonometric
    polynomials (grid-value isometry).
    """
    if u.spec != v.spec:
        raise ValueError("grid specs do not match")
    return float(np.sum(u.values * v.values) / u.spec.total)


def l2_norm(u: GridField) -> float:
    return float(np.sqrt(max(l2_inner(u, u), 0.0)))


def spectral_inner(a: SpectralField, b: SpectralField) -> float:
    """Plancherel sum ``sum_k <a_hat(k), b_hat(k)>`` (real part)."""
    if a.spec != b.spec:
        raise ValueError("grid specs do not match")
    return float(np.sum(a.coeffs * np.conj(b.coeffs)).real)


def interpolation_constant(r: float, s: float, dim: int, rel_tail=1e-6):
    """Constant ``c_{r,s}`` of the interpolation error bound.

    Evaluates ``1 + d^r rho_h^{2r} S`` with rho_h = 1 and
    ``S = sum_{m in N_0^d \\ 0} |m|^{-2s}`` by direct summation over
    ``|m|_inf <= M``, growing M until the integral-comparison tail bound
    drops below ``rel_tail`` of the partial sum.  Requires ``s > d/2``.

    Returns the constant for unit spacing ratio; multiply the lattice-sum
    term by ``rho_h^{2r}`` externally for anisotropic grids.
    """
    if 2 * s <= dim:
        raise ValueError(f"lattice sum diverges: need s > d/2, got s={s}, d={dim}")
    M = 8
    while True:
        axes = [np.arange(0, M + 1)] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        norm2 = sum(m.astype(float) ** 2 for m in mesh)
        norm2[(0,) * dim] = np.inf
        partial = float(np.sum(norm2 ** (-s)))
        # Integral comparison over the region outside the |m|_inf <= M box:
        # sum_{|m|_inf > M} |m|^{-2s} <= d * int_{|t| > M} ... <= c M^{d - 2s}.
        tail = dim * (2.0**dim) * M ** (dim - 2 * s) / (2 * s - dim)
        if tail < rel_tail * partial:
            return float(np.sqrt(1.0 + dim**r * partial))
        M *= 2
