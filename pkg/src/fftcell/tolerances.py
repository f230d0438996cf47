"""Centralized numerical tolerances.

The projector/isometry tolerances are set to roughly 100x the accumulated
FFT roundoff observed at desk-scale grid sizes; tests assert against these
named constants rather than ad-hoc literals.
"""

# Forward/inverse DFT round trip on real fields.
FFT_ROUNDTRIP = 1e-13

# Green-operator projector identities (idempotence, adjointness,
# Helmholtz decomposition, curl-free residuals) and Plancherel/isometry.
PROJECTOR = 1e-12

# Imaginary residue allowed after an inverse transform of Hermitian data,
# relative to max(1, max |real part|).  Anything larger signals broken
# Hermitian symmetry upstream and is treated as an error.
IMAG_RESIDUE = 1e-10

# Subspace membership of solver iterates (mean-free, curl-free).
SUBSPACE = 1e-10
