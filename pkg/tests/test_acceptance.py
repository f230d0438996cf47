"""Acceptance gate: one test per criterion, each ending in a single
pass/fail line (the pytest verdict for that test).  Tolerances are pinned
here and intentionally not shared with library code.
"""

import time

import numpy as np
import pytest

from fftcell.analysis import approximation_study, contrast_study, dense_oracle
from fftcell.cli import main as cli_main
from fftcell.families import checkerboard_2d, sine_1d
from fftcell.green import ReferenceTensor, apply_G0, project_J, project_mean
from fftcell.grid import GridSpec
from fftcell.homogenize import effective_tensor
from fftcell.material import sample_analytic
from fftcell.solver import LoadCase, SolverConfig, residual_norm, solve_cg, solve_neumann
from fftcell.transforms import dft_forward, l2_inner, l2_norm, spectral_inner

from conftest import (
    SMALL_SPECS,
    random_field,
    random_spd_field,
)


def report(criterion, detail):
    print(f"criterion {criterion}: PASS ({detail})")


def test_criterion_01_homogeneous_identity():
    spec = GridSpec((1.0, 1.0), (81, 81))
    a = sample_analytic(lambda x: 3.5, spec)
    start = time.perf_counter()
    load = LoadCase((1.2, -0.7))
    solved = solve_cg(a, load, SolverConfig(tol=1e-10))
    eff = effective_tensor(a, SolverConfig(tol=1e-10))
    elapsed = time.perf_counter() - start
    assert np.max(np.abs(solved.solution.values)) == 0.0
    assert residual_norm(a, load, solved.solution) <= 1e-12
    assert np.array_equal(eff.matrix, 3.5 * np.eye(2))
    assert elapsed < 1.0
    report(1, f"zero fluctuation, exact tensor, {elapsed:.3f}s")


def test_criterion_02_harmonic_mean_benchmark():
    # Independent quadrature oracle for the closed-form value.
    xs = np.linspace(-1.0, 1.0, 2**21, endpoint=False)
    oracle = 1.0 / np.mean(1.0 / (3.0 + 2.0 * np.sin(np.pi * xs)))
    assert abs(oracle - np.sqrt(5.0)) <= 1e-10

    family = sine_1d()
    a = family.sample(family.default_spec((255,)))
    start = time.perf_counter()
    eff = effective_tensor(a, SolverConfig(tol=1e-10, max_iter=500))
    elapsed = time.perf_counter() - start
    assert abs(eff.matrix[0, 0] - np.sqrt(5.0)) <= 1e-6
    assert elapsed < 1.0
    report(2, f"A_eff={eff.matrix[0, 0]:.12f} vs sqrt(5), {elapsed:.3f}s")


def test_criterion_03_dense_oracle_equivalence():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    cases = [(GridSpec((1.0, 1.0), (5, 5)), (1.0, 0.5))] * 10 + [
        (GridSpec((1.0,), (99,)), (1.0,))
    ] * 10
    for spec, E in cases:
        a = random_spd_field(spec, rng)
        load = LoadCase(E)
        cg = solve_cg(a, load, SolverConfig(tol=1e-13, max_iter=2000))
        assert cg.converged
        exact = dense_oracle(a, load)
        worst = max(worst, float(np.max(np.abs(cg.solution.values - exact.values))))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10
    assert elapsed < 10.0
    report(3, f"20 fields, max deviation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_04_projector_suite():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    for spec in SMALL_SPECS:
        d = spec.dim
        for _ in range(50):
            u = random_field(spec, rng)
            scale = max(1.0, float(np.max(np.abs(u.values))))
            B = rng.standard_normal((d, d))
            ref = ReferenceTensor(B @ B.T + 0.5 * np.eye(d))
            # Idempotence under a random SPD reference.
            once = apply_G0(u, ref)
            twice = apply_G0(once, ref)
            assert np.max(np.abs(twice.values - once.values)) <= 1e-12 * scale
            # Reference-weighted self-adjointness.
            v = random_field(spec, rng)

            def weighted(p, q):
                Ap = np.einsum("ab,b...->a...", ref.matrix, p.values)
                return float(np.sum(Ap * q.values) / spec.total)

            lhs = weighted(v, apply_G0(u, ref))
            rhs = weighted(apply_G0(v, ref), u)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
            # Scalar-reference independence.
            scalar_outs = [
                apply_G0(u, ReferenceTensor.scalar(lam, d)).values
                for lam in (0.5, 1.0, 10.0)
            ]
            for other in scalar_outs[1:]:
                assert np.max(np.abs(other - scalar_outs[0])) <= 1e-12 * scale
            # Curl-free + mean-free output; three-way split with orthogonality.
            sref = ReferenceTensor.scalar(1.0, d)
            from conftest import curl_residual, mean_residual

            g = apply_G0(u, sref)
            assert curl_residual(g) <= 1e-12
            assert mean_residual(g) <= 1e-12
            parts = [project_mean(u), g, project_J(u, sref)]
            total = sum(p.values for p in parts)
            assert np.max(np.abs(total - u.values)) <= 1e-12 * scale
            for i in range(3):
                for j in range(i + 1, 3):
                    assert abs(l2_inner(parts[i], parts[j])) <= 1e-12 * scale**2
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report(4, f"50 fields per grid in d=1,2,3, {elapsed:.1f}s")


def test_criterion_05_isometry_and_plancherel():
    rng = np.random.default_rng(5)
    for i in range(50):
        spec = SMALL_SPECS[i % len(SMALL_SPECS)]
        u, v = random_field(spec, rng), random_field(spec, rng)
        lhs = l2_inner(u, v)
        rhs = spectral_inner(dft_forward(u), dft_forward(v))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    report(5, "grid inner product equals spectral sum on 50 pairs")


@pytest.fixture(scope="module")
def contrast_scaling():
    start = time.perf_counter()
    results = contrast_study(
        lambda rho: checkerboard_2d(1.0, rho),
        [10.0, 100.0, 1000.0],
        (81, 81),
        tol=1e-6,
    )
    results["elapsed"] = time.perf_counter() - start
    return results


def test_criterion_06_cg_contrast_scaling(contrast_scaling):
    cg = contrast_scaling["cg"]
    assert not any(f.startswith("censored") for f in cg.flags)
    assert 0.35 <= cg.fitted_exponent <= 0.65
    assert contrast_scaling["elapsed"] < 120.0
    report(6, f"CG exponent {cg.fitted_exponent:.3f}, "
              f"{contrast_scaling['elapsed']:.1f}s for both methods")


def test_criterion_07_neumann_contrast_scaling(contrast_scaling):
    ne = contrast_scaling["neumann"]
    cg = contrast_scaling["cg"]
    assert not any(f.startswith("censored") for f in ne.flags)
    assert 0.8 <= ne.fitted_exponent <= 1.2
    assert ne.values[-1] >= cg.values[-1]
    report(7, f"fixed-point exponent {ne.fitted_exponent:.3f}, "
              f"{ne.values[-1]:.0f} vs {cg.values[-1]:.0f} iterations at contrast 1000")


def test_criterion_08_cg_reference_independence():
    a = checkerboard_2d(1.0, 100.0).sample(GridSpec((1.0, 1.0), (81, 81)))
    load = LoadCase((1.0, 0.0))
    runs = []
    for lam in (0.5, 1.0, 10.0):
        cfg = SolverConfig(
            tol=1e-6, max_iter=1000, reference=ReferenceTensor.scalar(lam, 2)
        )
        runs.append(solve_cg(a, load, cfg, record_iterates=True))
    base = runs[0]
    scale = max(l2_norm(it) for it in base.iterates[1:])
    worst = 0.0
    for other in runs[1:]:
        assert other.iterations == base.iterations
        for x, y in zip(base.iterates, other.iterates):
            worst = max(worst, float(np.max(np.abs(x.values - y.values))))
    assert worst <= 1e-10 * scale
    report(8, f"{base.iterations} iterations agree to {worst:.2e} across scalars")


def test_criterion_09_approximation_rates():
    results = approximation_study(2.0, [9, 17, 33, 65])
    pn0 = results[("PN", 0)].fitted_exponent
    qn0 = results[("QN", 0)].fitted_exponent
    pn1 = results[("PN", 1)].fitted_exponent
    qn1 = results[("QN", 1)].fitted_exponent
    assert pn0 >= 2.0 - 0.2
    assert qn0 >= 2.0 - 0.3
    assert pn1 >= 1.0 - 0.2
    assert qn1 >= 1.0 - 0.3

    # Aliasing identity: a mode one lattice period up interpolates onto the
    # base mode with coefficients exact to 1e-13.
    from fftcell.transforms import interpolate

    spec = GridSpec((1.0,), (3,))
    u = interpolate(lambda x: [np.cos(4.0 * np.pi * x[0])], spec)
    s = dft_forward(u)
    expected = np.zeros(3, dtype=complex)
    expected[1] = 0.5
    expected[2] = 0.5  # slot of k = -1
    assert np.max(np.abs(s.coeffs[0] - expected)) <= 1e-13
    report(9, f"exponents PN {pn0:.2f}/{pn1:.2f}, QN {qn0:.2f}/{qn1:.2f}, "
              "aliasing exact")


def test_criterion_10_checkerboard_duality():
    start = time.perf_counter()
    a = checkerboard_2d(1.0, 100.0).sample(GridSpec((1.0, 1.0), (243, 243)))
    eff = effective_tensor(a, SolverConfig(tol=1e-6, max_iter=1000))
    elapsed = time.perf_counter() - start
    target = 10.0  # geometric mean of the phases
    for alpha in range(2):
        assert abs(eff.matrix[alpha, alpha] - target) <= 0.05 * target
    assert abs(eff.matrix[0, 1]) <= 0.5
    assert abs(eff.matrix[1, 0]) <= 0.5
    assert elapsed < 120.0
    report(10, f"diagonal {eff.matrix[0, 0]:.4f}/{eff.matrix[1, 1]:.4f} "
               f"vs 10, {elapsed:.1f}s")


def test_criterion_11_a_priori_fluctuation_bound():
    tol = 1e-6
    instances = [
        (sine_1d().sample(sine_1d().default_spec((255,))), LoadCase((1.0,)), "cg"),
        (sine_1d().sample(sine_1d().default_spec((255,))), LoadCase((-2.5,)), "neumann"),
        (
            checkerboard_2d(1.0, 100.0).sample(GridSpec((1.0, 1.0), (81, 81))),
            LoadCase((0.6, -0.8)),
            "cg",
        ),
        (
            checkerboard_2d(1.0, 10.0).sample(GridSpec((1.0, 1.0), (27, 27))),
            LoadCase((1.0, 1.0)),
            "neumann",
        ),
    ]
    for a, load, method in instances:
        cfg = SolverConfig(method=method, tol=tol, max_iter=20000)
        solver = solve_cg if method == "cg" else solve_neumann
        rep = solver(a, load, cfg)
        assert rep.converged
        E_norm = float(np.sqrt(np.dot(load.E, load.E)))
        assert l2_norm(rep.solution) <= a.rho_A * E_norm * (1 + 10 * tol)
    report(11, f"{len(instances)} solved instances within the contrast bound")


def test_criterion_12_deterministic_outputs(tmp_path):
    args = [
        "homogenize",
        "--family", "checkerboard:1,100",
        "--grid", "27,27",
        "--tol", "1e-8",
    ]
    assert cli_main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("effective_tensor.csv", "cases.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()
    report(12, "repeated homogenization runs byte-identical")
