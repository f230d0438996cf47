"""Coefficient field A(x) on the grid: analytic sampling, voxel-file IO,
SPD validation and ellipticity bounds.

Storage is packed symmetric: diagonal entries first, then the strict upper
triangle row by row, giving ``d (d + 1) / 2`` components per grid point.
Pointwise eigenvalue bounds use closed forms for d <= 3 so the core carries
no iterative eigensolver dependency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridSpec, grid_point, index_to_slot, iter_lattice
from .transforms import GridField


class MaterialDataError(ValueError):
    """Invalid coefficient data (non-finite, non-SPD values)."""


class VoxelFormatError(MaterialDataError):
    """Malformed voxel file: bad header, even shape, or size mismatch."""


def sym_component_pairs(dim):
    """Index pairs of the packed symmetric storage, diagonal first."""
    pairs = [(a, a) for a in range(dim)]
    pairs += [(a, b) for a in range(dim) for b in range(a + 1, dim)]
    return pairs


def _pack(matrices, dim):
    """(d, d, *N) -> (nsym, *N)."""
    return np.stack([matrices[a, b] for a, b in sym_component_pairs(dim)])


def _unpack(packed, dim):
    """(nsym, *N) -> (d, d, *N)."""
    grid_shape = packed.shape[1:]
    full = np.empty((dim, dim) + grid_shape)
    for comp, (a, b) in enumerate(sym_component_pairs(dim)):
        full[a, b] = packed[comp]
        full[b, a] = packed[comp]
    return full


def _eigen_range(full, dim):
    """Pointwise min/max eigenvalues, closed form for d <= 3."""
    if dim == 1:
        lam = full[0, 0]
        return lam, lam
    if dim == 2:
        a, b, c = full[0, 0], full[0, 1], full[1, 1]
        mean = 0.5 * (a + c)
        radius = np.sqrt(0.25 * (a - c) ** 2 + b**2)
        return mean - radius, mean + radius
    if dim == 3:
        # Trigonometric solution of the characteristic cubic (Smith 1961).
        q = np.trace(full, axis1=0, axis2=1) / 3.0
        B = full - q * np.eye(3).reshape((3, 3) + (1,) * (full.ndim - 2))
        p2 = np.einsum("ab...,ab...->...", B, B) / 6.0
        p = np.sqrt(np.maximum(p2, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            detB = (
                B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
                - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
                + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0])
            )
            r = np.where(p > 0, detB / (2.0 * np.maximum(p, 1e-300) ** 3), 0.0)
        r = np.clip(r, -1.0, 1.0)
        phi = np.arccos(r) / 3.0
        lam_max = q + 2.0 * p * np.cos(phi)
        lam_min = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
        return lam_min, lam_max
    # Generic fallback for untypical dimensions.
    grid_shape = full.shape[2:]
    mats = np.moveaxis(full.reshape(dim, dim, -1), -1, 0)
    eigs = np.linalg.eigvalsh(mats)
    return (
        eigs[:, 0].reshape(grid_shape),
        eigs[:, -1].reshape(grid_shape),
    )


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric positive-definite d x d tensor per grid point."""

    spec: GridSpec
    components: np.ndarray  # packed symmetric, (d(d+1)/2, *N)
    _full: np.ndarray = field(init=False, repr=False)
    c_A: float = field(init=False)
    C_A: float = field(init=False)

    def __post_init__(self):
        d = self.spec.dim
        nsym = d * (d + 1) // 2
        comp = np.asarray(self.components, dtype=float)
        expected = (nsym,) + self.spec.shape
        if comp.shape != expected:
            raise MaterialDataError(
                f"components shape {comp.shape} != expected {expected}"
            )
        if not np.all(np.isfinite(comp)):
            bad = np.argwhere(~np.isfinite(comp))[0]
            raise MaterialDataError(f"non-finite coefficient at {tuple(bad)}")
        full = _unpack(comp, d)
        lam_min, lam_max = _eigen_range(full, d)
        if np.min(lam_min) <= 0:
            slot = np.unravel_index(int(np.argmin(lam_min)), self.spec.shape)
            raise MaterialDataError(
                f"coefficient tensor not positive definite at grid slot {slot} "
                f"(min eigenvalue {np.min(lam_min):.6g})"
            )
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "_full", full)
        object.__setattr__(self, "c_A", float(np.min(lam_min)))
        object.__setattr__(self, "C_A", float(np.max(lam_max)))

    @property
    def rho_A(self):
        return self.C_A / self.c_A

    @property
    def full_tensors(self):
        """Expanded (d, d, *N) view of the coefficient tensors."""
        return self._full

    @classmethod
    def from_matrices(cls, spec, matrices):
        matrices = np.asarray(matrices, dtype=float)
        expected = (spec.dim, spec.dim) + spec.shape
        if matrices.shape != expected:
            raise MaterialDataError(
                f"matrices shape {matrices.shape} != expected {expected}"
            )
        sym_err = np.max(np.abs(matrices - np.swapaxes(matrices, 0, 1)))
        if sym_err > 1e-12 * max(1.0, float(np.max(np.abs(matrices)))):
            raise MaterialDataError(f"tensors not symmetric (residual {sym_err:.3e})")
        return cls(spec, _pack(matrices, spec.dim))

    @classmethod
    def isotropic(cls, spec, scalars):
        scalars = np.asarray(scalars, dtype=float)
        if scalars.shape != spec.shape:
            raise MaterialDataError(
                f"scalar field shape {scalars.shape} != grid shape {spec.shape}"
            )
        d = spec.dim
        nsym = d * (d + 1) // 2
        comp = np.zeros((nsym,) + spec.shape)
        comp[:d] = scalars
        return cls(spec, comp)


def sample_analytic(f, spec: GridSpec) -> CoefficientField:
    """Sample a pointwise tensor function at the grid points.

    ``f`` maps a point to a symmetric d x d matrix, or to a scalar
    (interpreted as an isotropic tensor a(x) * I).
    """
    d = spec.dim
    matrices = np.empty((d, d) + spec.shape)
    for k in iter_lattice(spec):
        slot = index_to_slot(spec, k)
        val = np.asarray(f(grid_point(spec, k)), dtype=float)
        if val.ndim == 0:
            val = float(val) * np.eye(d)
        if val.shape != (d, d):
            raise MaterialDataError(
                f"sampler returned shape {val.shape} at lattice index {k}"
            )
        matrices[(slice(None), slice(None)) + slot] = val
    return CoefficientField.from_matrices(spec, matrices)


def apply_A(a: CoefficientField, u: GridField) -> GridField:
    """Pointwise matrix-vector product, the block-diagonal action of A."""
    if a.spec != u.spec:
        raise ValueError("coefficient field and grid field specs do not match")
    out = np.einsum("ab...,b...->a...", a.full_tensors, u.values)
    return GridField(u.spec, out)


# ---------------------------------------------------------------------------
# Voxel file format: <name>.json header + <name>.bin float64-LE payload in
# row-major shifted storage order (the order of iter_lattice).

_KIND_COMPONENTS = {
    "isotropic": lambda d: 1,
    "symmetric-tensor": lambda d: d * (d + 1) // 2,
    "vector": lambda d: d,
}


def _header_path(path):
    p = Path(path)
    return p if p.suffix == ".json" else p.with_suffix(".json")


def save_voxel(path, spec: GridSpec, payload: np.ndarray, kind: str):
    """Write a header/payload pair; payload shape must match ``kind``."""
    if kind not in _KIND_COMPONENTS:
        raise MaterialDataError(f"unknown voxel kind {kind!r}")
    ncomp = _KIND_COMPONENTS[kind](spec.dim)
    payload = np.ascontiguousarray(payload, dtype="<f8")
    expected = spec.shape if kind == "isotropic" else (ncomp,) + spec.shape
    if payload.shape != expected:
        raise MaterialDataError(f"payload shape {payload.shape} != expected {expected}")
    header = {
        "dim": spec.dim,
        "shape": list(spec.shape),
        "half_periods": list(spec.half_periods),
        "kind": kind,
        "dtype": "f64le",
        "order": "row-major-shifted",
    }
    hpath = _header_path(path)
    hpath.write_text(json.dumps(header, indent=2) + "\n")
    payload.tofile(hpath.with_suffix(".bin"))


def save_coefficients(path, a: CoefficientField, kind="symmetric-tensor"):
    if kind == "isotropic":
        d = a.spec.dim
        diag = a.components[:d]
        off = a.components[d:]
        if np.any(off != 0) or np.any(diag != diag[0]):
            raise MaterialDataError("field is not isotropic; cannot save as such")
        save_voxel(path, a.spec, a.components[0], "isotropic")
    else:
        save_voxel(path, a.spec, a.components, "symmetric-tensor")


def save_field(path, u: GridField):
    save_voxel(path, u.spec, u.values, "vector")


def load_header(path):
    hpath = _header_path(path)
    try:
        header = json.loads(hpath.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise VoxelFormatError(f"cannot read voxel header {hpath}: {exc}") from exc
    for key in ("dim", "shape", "half_periods", "kind", "dtype", "order"):
        if key not in header:
            raise VoxelFormatError(f"voxel header {hpath} missing field {key!r}")
    if header["dtype"] != "f64le" or header["order"] != "row-major-shifted":
        raise VoxelFormatError(
            f"unsupported voxel encoding {header['dtype']}/{header['order']}"
        )
    return header


def _load_payload(path, header):
    try:
        spec = GridSpec(tuple(header["half_periods"]), tuple(header["shape"]))
    except ValueError as exc:
        raise VoxelFormatError(
            f"voxel header violates the odd-grid requirement: {exc}"
        ) from exc
    kind = header["kind"]
    if kind not in _KIND_COMPONENTS:
        raise VoxelFormatError(f"unknown voxel kind {kind!r}")
    ncomp = _KIND_COMPONENTS[kind](spec.dim)
    bpath = _header_path(path).with_suffix(".bin")
    data = np.fromfile(bpath, dtype="<f8")
    if data.size != ncomp * spec.total:
        raise VoxelFormatError(
            f"payload {bpath} holds {data.size} values, expected {ncomp * spec.total}"
        )
    shape = spec.shape if kind == "isotropic" else (ncomp,) + spec.shape
    return spec, kind, data.reshape(shape)


def load_voxel(path, spec_override: GridSpec | None = None) -> CoefficientField:
    """Load a coefficient field from a voxel file pair.

    ``spec_override`` replaces the header's cell geometry (the shape must
    still match the payload).
    """
    header = load_header(path)
    spec, kind, payload = _load_payload(path, header)
    if spec_override is not None:
        if spec_override.shape != spec.shape:
            raise MaterialDataError(
                f"override shape {spec_override.shape} != file shape {spec.shape}"
            )
        spec = spec_override
    if kind == "isotropic":
        return CoefficientField.isotropic(spec, payload)
    if kind == "symmetric-tensor":
        return CoefficientField(spec, payload)
    raise MaterialDataError(f"voxel kind {kind!r} does not hold coefficient data")


def load_field(path) -> GridField:
    header = load_header(path)
    spec, kind, payload = _load_payload(path, header)
    if kind != "vector":
        raise MaterialDataError(f"voxel kind {kind!r} does not hold a vector field")
    return GridField(spec, payload)
