"""Fourier-space Green operator of a constant reference medium and the
discrete Helmholtz projectors built from it.

Per mode the kernel is the rank-one block

    Gamma_hat(k) = xi(k) (x) xi(k) / <A0 xi(k), xi(k)>,   Gamma_hat(0) = 0,

so applying it is a forward FFT, a per-mode multiply and an inverse FFT.
``apply_G0`` composes the kernel with the constant reference tensor A0 and
is a projection onto the curl-free zero-mean subspace; for scalar A0 it is
orthogonal and independent of the scalar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, frequency, frequency_grid
from .transforms import GridField, dft_forward, dft_inverse, SpectralField


@dataclass(frozen=True)
class ReferenceTensor:
    """Constant SPD reference tensor A0.

    ``scalar_mode`` is set when A0 = lambda * I; several operators (the
    orthogonal projector, the projected CG system) require it.
    """

    matrix: np.ndarray
    scalar_mode: float | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"reference tensor must be square, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ValueError("reference tensor must be symmetric")
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] <= 0:
            raise ValueError(f"reference tensor must be positive definite, eigs={eigs}")
        object.__setattr__(self, "matrix", m)
        if self.scalar_mode is not None:
            lam = float(self.scalar_mode)
            if lam <= 0 or not np.allclose(m, lam * np.eye(m.shape[0])):
                raise ValueError("scalar_mode inconsistent with matrix")
            object.__setattr__(self, "scalar_mode", lam)

    @classmethod
    def scalar(cls, lam, dim):
        lam = float(lam)
        return cls(lam * np.eye(dim), scalar_mode=lam)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def c_bound(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])

    @property
    def C_bound(self):
        return float(np.linalg.eigvalsh(self.matrix)[-1])

    @property
    def contrast(self):
        return self.C_bound / self.c_bound


def gamma_hat(k, ref: ReferenceTensor, spec: GridSpec) -> np.ndarray:
    """Per-mode kernel block; zero matrix at k = 0."""
    if all(int(ki) == 0 for ki in k):
        return np.zeros((spec.dim, spec.dim))
    xi = frequency(spec, k)
    return np.outer(xi, xi) / float(xi @ ref.matrix @ xi)


def _mode_multiply(spec, coeffs, ref, with_A0):
    """Apply Gamma_hat (optionally right-composed with A0) to all modes."""
    xi = frequency_grid(spec)
    denom = np.einsum("a...,ab,b...->...", xi, ref.matrix, xi)
    denom[(0,) * spec.dim] = 1.0  # k = 0 block is zeroed below
    v = coeffs
    if with_A0:
        v = np.einsum("ab,b...->a...", ref.matrix, coeffs)
    dots = np.einsum("a...,a...->...", xi, v)
    out = xi * (dots / denom)[np.newaxis]
    out[(slice(None),) + (0,) * spec.dim] = 0.0
    return out


def apply_gamma0(u: GridField, ref: ReferenceTensor) -> GridField:
    """Action of the Green operator Gamma0 (no A0 factor)."""
    s = dft_forward(u)
    return dft_inverse(SpectralField(u.spec, _mode_multiply(u.spec, s.coeffs, ref, False)))


def apply_G0(u: GridField, ref: ReferenceTensor) -> GridField:
    """Projection G0 = Gamma0 A0 onto the curl-free zero-mean subspace."""
    s = dft_forward(u)
    return dft_inverse(SpectralField(u.spec, _mode_multiply(u.spec, s.coeffs, ref, True)))


def project_mean(u: GridField) -> GridField:
    """Projector onto constant fields: the discrete mean, expanded."""
    mean = u.values.reshape(u.spec.dim, -1).mean(axis=1)
    return GridField.constant(u.spec, mean)


def project_J(u: GridField, ref: ReferenceTensor) -> GridField:
    """Projector onto the divergence-free zero-mean subspace.

    Defined by subtraction, ``u - mean(u) - G0 u``, so the three-way
    decomposition sums to the identity exactly.  Requires a scalar
    reference: only then is G0 orthogonal and the complement well-defined.
    """
    if ref.scalar_mode is None:
        raise ValueError("project_J requires a scalar reference tensor (lambda * I)")
    rest = u.values - project_mean(u).values - apply_G0(u, ref).values
    return GridField(u.spec, rest)
