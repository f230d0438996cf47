"""Matrix-free solvers for the fully discrete cell problem.

Two routes are provided for the same discrete solution:

* projected conjugate gradients on ``G A e~ = -G A E`` where G is the
  orthogonal curl-free projector (scalar reference only); the projector is
  embedded in the operator so CG runs on full grid-shaped vectors and every
  iterate stays in the curl-free zero-mean subspace,
* the classical fixed-point (Neumann-series) iteration
  ``e <- -Gamma0 (A - A0) e + E`` around a constant reference medium A0.

All norms are the discrete mean L2 norm, matching the trigonometric
polynomial L2 norm through the grid-value isometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, frequency_grid
from .green import ReferenceTensor
from .material import CoefficientField, apply_A
from .transforms import GridField, l2_norm

_DIVERGENCE_WINDOW = 10  # consecutive growth steps before declaring divergence


@dataclass(frozen=True)
class LoadCase:
    """Mean applied gradient E."""

    E: tuple

    def __post_init__(self):
        E = tuple(float(e) for e in self.E)
        if not all(np.isfinite(E)):
            raise ValueError(f"load case entries must be finite, got {E}")
        object.__setattr__(self, "E", E)

    @property
    def dim(self):
        return len(self.E)

    def expand(self, spec: GridSpec) -> GridField:
        """Constant grid expansion E_N."""
        if len(self.E) != spec.dim:
            raise ValueError("load case dimension does not match grid")
        return GridField.constant(spec, self.E)


@dataclass(frozen=True)
class SolverConfig:
    method: str = "cg"
    tol: float = 1e-6
    max_iter: int = 1000
    reference: ReferenceTensor | None = None  # CG accepts scalar only

    def __post_init__(self):
        if self.method not in ("cg", "neumann"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (0 < self.tol < 1):
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if (
            self.method == "cg"
            and self.reference is not None
            and self.reference.scalar_mode is None
        ):
            # Non-scalar references make the projection non-orthogonal and
            # the projected CG theory does not cover them.
            raise ValueError("the CG route requires a scalar reference (lambda * I)")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: the fluctuation field and iteration history."""

    solution: GridField  # e~, mean-free and curl-free
    iterations: int
    residual_history: tuple
    converged: bool
    method: str
    message: str = ""
    iterates: tuple = ()  # per-iteration solutions, only when recorded


class _Projector:
    """Cached Fourier-space machinery for one (spec, reference) pair."""

    def __init__(self, spec: GridSpec, ref: ReferenceTensor | None = None):
        self.spec = spec
        self.axes = tuple(range(1, spec.dim + 1))
        xi = frequency_grid(spec)
        self.xi = xi
        denom = np.einsum("a...,a...->...", xi, xi)
        denom[(0,) * spec.dim] = 1.0
        self.denom_orth = denom
        if ref is not None:
            denom_ref = np.einsum("a...,ab,b...->...", xi, ref.matrix, xi)
            denom_ref[(0,) * spec.dim] = 1.0
            self.denom_ref = denom_ref

    def _project_hat(self, vhat, denom):
        dots = np.einsum("a...,a...->...", self.xi, vhat)
        out = self.xi * (dots / denom)[np.newaxis]
        out[(slice(None),) + (0,) * self.spec.dim] = 0.0
        return out

    def apply_orthogonal(self, values):
        """Orthogonal projection G onto the curl-free zero-mean subspace."""
        vhat = np.fft.fftn(values, axes=self.axes)
        phat = self._project_hat(vhat, self.denom_orth)
        return np.fft.ifftn(phat, axes=self.axes).real

    def apply_gamma_ref(self, values):
        """Green operator Gamma0 for the configured reference tensor."""
        vhat = np.fft.fftn(values, axes=self.axes)
        phat = self._project_hat(vhat, self.denom_ref)
        return np.fft.ifftn(phat, axes=self.axes).real


def apply_system(a: CoefficientField, u: GridField) -> GridField:
    """System operator ``G A u`` with the orthogonal (scalar-independent) G."""
    proj = _Projector(a.spec)
    Au = apply_A(a, u)
    return GridField(a.spec, proj.apply_orthogonal(Au.values))


def residual_norm(a: CoefficientField, load: LoadCase, candidate: GridField) -> float:
    """Discrete L2 norm of ``G A (candidate + E_N)``; zero iff it solves."""
    total = GridField(a.spec, candidate.values + load.expand(a.spec).values)
    return l2_norm(apply_system(a, total))


def _inner(spec, x, y):
    return float(np.sum(x * y) / spec.total)


def solve_cg(
    a: CoefficientField,
    load: LoadCase,
    cfg: SolverConfig,
    init: GridField | None = None,
    record_iterates: bool = False,
) -> SolveReport:
    """Conjugate gradients on the projected system.

    The reference stopping scale ``|r_0|`` is always the zero-init residual
    (the right-hand-side norm), so restarts with a warm start stop at the
    same absolute accuracy.  A scalar reference ``lambda * I`` may be
    supplied; the projection it induces is the same orthogonal projection,
    so the iterates are independent of lambda up to rounding.  With
    ``record_iterates`` the report carries every solution iterate.
    """
    if cfg.method != "cg":
        raise ValueError("config method is not 'cg'")
    spec = a.spec
    proj = _Projector(spec, cfg.reference)
    if cfg.reference is None:
        project = proj.apply_orthogonal
        lam = None
    else:
        # G0 = Gamma0 A0 with A0 = lambda I: scale by lambda and divide by
        # <A0 xi, xi>; algebraically the orthogonal projection again.
        lam = cfg.reference.scalar_mode

        def project(values):
            return proj.apply_gamma_ref(lam * values)

    def operator(values):
        return project(np.einsum("ab...,b...->a...", a.full_tensors, values))

    E_vals = load.expand(spec).values
    rhs = -operator(E_vals)
    r0_norm = np.sqrt(_inner(spec, rhs, rhs))

    if init is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        # Sanitize user input drift back into the curl-free subspace.
        x = proj.apply_orthogonal(init.values)
        r = rhs - operator(x)

    history = [np.sqrt(_inner(spec, r, r))]
    iterates = [GridField(spec, x.copy())] if record_iterates else []
    if r0_norm == 0.0 or history[0] <= cfg.tol * r0_norm:
        return SolveReport(
            GridField(spec, x), 0, tuple(history), True, "cg",
            iterates=tuple(iterates),
        )

    p = r.copy()
    rr = _inner(spec, r, r)
    converged = False
    iterations = 0
    for i in range(cfg.max_iter):
        Ap = operator(p)
        pAp = _inner(spec, p, Ap)
        if pAp <= 0:
            return SolveReport(
                GridField(spec, x),
                iterations,
                tuple(history),
                False,
                "cg",
                message=f"operator lost positive definiteness (pAp={pAp:.3e})",
                iterates=tuple(iterates),
            )
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = _inner(spec, r, r)
        iterations = i + 1
        history.append(np.sqrt(rr_new))
        if record_iterates:
            iterates.append(GridField(spec, x.copy()))
        if np.sqrt(rr_new) <= cfg.tol * r0_norm:
            converged = True
            break
        p = r + (rr_new / rr) * p
        rr = rr_new

    return SolveReport(
        GridField(spec, x), iterations, tuple(history), converged, "cg",
        iterates=tuple(iterates),
    )


def default_reference(a: CoefficientField) -> ReferenceTensor:
    """Classical reference choice ``A0 = (c_A + C_A)/2 * I``."""
    return ReferenceTensor.scalar(0.5 * (a.c_A + a.C_A), a.spec.dim)


def solve_neumann(
    a: CoefficientField, load: LoadCase, cfg: SolverConfig
) -> SolveReport:
    """Fixed-point iteration ``e <- -Gamma0 (A - A0) e + E``.

    Converges when the relative update norm drops below tol; sustained
    update growth over a window of iterations is reported as divergence
    (the spectral radius of the iteration operator exceeds one).
    """
    ref = cfg.reference if cfg.reference is not None else default_reference(a)
    if ref.dim != a.spec.dim:
        raise ValueError("reference tensor dimension does not match grid")
    spec = a.spec
    proj = _Projector(spec, ref)
    E_vals = load.expand(spec).values
    contrast = a.full_tensors - ref.matrix.reshape(
        (spec.dim, spec.dim) + (1,) * spec.dim
    )

    e = E_vals.copy()
    scale = max(l2_norm(load.expand(spec)), np.finfo(float).tiny)
    history = []
    growth_streak = 0
    prev_update = None
    converged = False
    iterations = 0
    for i in range(cfg.max_iter):
        e_new = E_vals - proj.apply_gamma_ref(
            np.einsum("ab...,b...->a...", contrast, e)
        )
        update = np.sqrt(_inner(spec, e_new - e, e_new - e))
        history.append(update)
        e = e_new
        iterations = i + 1
        if update <= cfg.tol * scale:
            converged = True
            break
        if prev_update is not None and update > prev_update:
            growth_streak += 1
            if growth_streak >= _DIVERGENCE_WINDOW:
                return SolveReport(
                    GridField(spec, e - E_vals),
                    iterations,
                    tuple(history),
                    False,
                    "neumann",
                    message=(
                        "divergent fixed-point iteration for reference tensor "
                        f"{ref.matrix.tolist()}"
                    ),
                )
        else:
            growth_streak = 0
        prev_update = update

    return SolveReport(
        GridField(spec, e - E_vals), iterations, tuple(history), converged, "neumann"
    )


def solve(a: CoefficientField, load: LoadCase, cfg: SolverConfig, init=None):
    if cfg.method == "cg":
        return solve_cg(a, load, cfg, init=init)
    return solve_neumann(a, load, cfg)
