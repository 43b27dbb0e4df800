"""Tests for the Galerkin eigensolver on star-shaped planar domains."""

import math
import warnings

import numpy as np
import pytest

from bisteklov import (
    DomainValidationError,
    StarDomain,
    area,
    assemble,
    boundary_geometry,
    eigenfunction_boundary_data,
    eigenvalue_of_order,
    eval_basis,
    make_trial_basis,
    solve,
    sorted_spectrum,
)
from bisteklov.special_functions import ultraspherical_i_tail

DISK = StarDomain(a0=1.0)


def disk_reference(tau: float, count: int) -> np.ndarray:
    """First `count` disk eigenvalues (multiplicities included) from the closed form."""
    flat = sorted_spectrum(2, tau, count).flatten()
    return np.array([lam for _, lam, _ in flat])


def solve_domain(domain: StarDomain, tau: float, k_max: int = 10, **kw):
    basis = make_trial_basis(k_max, tau)
    forms = assemble(domain, tau, basis, **kw)
    return solve(forms), basis


class TestTrialBasis:
    def test_size_and_ordering(self):
        basis = make_trial_basis(3, 1.0)
        assert basis.size == 2 * (2 * 3 + 1)
        assert basis.tags[0] == ("harmonic", 0, "cos")
        assert basis.tags[1] == ("harmonic", 1, "cos")
        assert basis.tags[2] == ("harmonic", 1, "sin")
        assert basis.tags[7] == ("bessel", 0, "cos")
        families = {f for f, _, _ in basis.tags}
        assert families == {"harmonic", "bessel"}

    def test_validation(self):
        with pytest.raises(DomainValidationError):
            make_trial_basis(0, 1.0)
        with pytest.raises(DomainValidationError):
            make_trial_basis(3, -1.0)


class TestEvalBasis:
    def test_harmonic_closed_forms(self):
        basis = make_trial_basis(3, 1.0)
        # index 1 is Re(w) = x
        v, g, H = eval_basis(basis, 1, (0.3, 0.4))
        assert v == pytest.approx(0.3, abs=1e-15)
        assert np.allclose(g, [1.0, 0.0], atol=1e-15)
        assert np.allclose(H, 0.0, atol=1e-15)
        # index 4 is Im(w^2) = 2xy
        v, g, H = eval_basis(basis, 4, (0.3, 0.4))
        assert v == pytest.approx(2 * 0.3 * 0.4, rel=1e-14)
        assert np.allclose(g, [2 * 0.4, 2 * 0.3], rtol=1e-14)
        assert np.allclose(H, [[0.0, 2.0], [2.0, 0.0]], atol=1e-14)

    def test_center_offset(self):
        basis = make_trial_basis(2, 1.0)
        v, g, _ = eval_basis(basis, 1, (1.3, 0.4), center=(1.0, 0.0))
        assert v == pytest.approx(0.3, abs=1e-15)
        assert np.allclose(g, [1.0, 0.0], atol=1e-15)

    def test_bessel_derivatives_by_differencing(self):
        basis = make_trial_basis(3, 2.0)
        idx = next(i for i, t in enumerate(basis.tags) if t == ("bessel", 2, "cos"))
        p = np.array([0.55, -0.35])
        h = 1e-5
        v, g, H = eval_basis(basis, idx, p)

        def val(q):
            return eval_basis(basis, idx, q)[0]

        for c in range(2):
            e = np.zeros(2)
            e[c] = h
            fd = (val(p + e) - val(p - e)) / (2 * h)
            assert g[c] == pytest.approx(fd, rel=1e-8, abs=1e-10)
            fd2 = (val(p + e) - 2 * v + val(p - e)) / h**2
            assert H[c, c] == pytest.approx(fd2, rel=1e-5, abs=1e-6)
        ex, ey = np.array([h, 0.0]), np.array([0.0, h])
        fd_xy = (val(p + ex + ey) - val(p + ex - ey) - val(p - ex + ey) + val(p - ex - ey)) / (
            4 * h * h
        )
        assert H[0, 1] == pytest.approx(fd_xy, rel=1e-5, abs=1e-6)
        assert H[1, 0] == H[0, 1]

    def test_singular_center_rejected(self):
        basis = make_trial_basis(2, 1.0)
        idx = next(i for i, t in enumerate(basis.tags) if t == ("bessel", 1, "cos"))
        with pytest.raises(DomainValidationError):
            eval_basis(basis, idx, (0.0, 0.0))

    def test_index_validation(self):
        basis = make_trial_basis(2, 1.0)
        with pytest.raises(DomainValidationError):
            eval_basis(basis, basis.size, (0.1, 0.1))
        with pytest.raises(DomainValidationError):
            eval_basis(basis, -1, (0.1, 0.1))


class TestAssemble:
    def test_boundary_mass_block_structure(self):
        tau = 1.0
        basis = make_trial_basis(3, tau)
        forms = assemble(DISK, tau, basis, n_boundary=256)
        B = forms.boundary_mass
        s = math.sqrt(tau)

        def trace(tag):
            family, k, _ = tag
            if family == "harmonic":
                return 1.0
            return float(ultraspherical_i_tail(k, 2, np.array([s]))[0][0])

        for i, ti in enumerate(basis.tags):
            for j, tj in enumerate(basis.tags):
                if (ti[1], ti[2]) != (tj[1], tj[2]):
                    assert abs(B[i, j]) < 1e-13, (ti, tj)
                else:
                    ang = 2.0 * np.pi if ti[1] == 0 else np.pi
                    want = trace(ti) * trace(tj) * ang
                    assert B[i, j] == pytest.approx(want, rel=1e-12), (ti, tj)

    def test_stiffness_basic_properties(self):
        tau = 2.0
        basis = make_trial_basis(4, tau)
        forms = assemble(DISK, tau, basis)
        A = forms.stiffness
        assert np.allclose(A, A.T, atol=0)
        w = np.linalg.eigvalsh(A)
        assert w.min() > -1e-10 * w.max()
        # the constant trial function has zero energy
        assert np.abs(A[0]).max() < 1e-12 * np.abs(A).max()
        # Re(w) has zero Hessian and unit gradient: energy tau * area
        assert A[1, 1] == pytest.approx(tau * np.pi, rel=1e-12)

    def test_tau_mismatch_rejected(self):
        basis = make_trial_basis(3, 1.0)
        with pytest.raises(DomainValidationError):
            assemble(DISK, 2.0, basis)

    def test_resolution_check(self):
        # high harmonic orders push the radial integrand degree past an 8-point rule
        domain = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.0, 0.1))
        basis = make_trial_basis(12, 1.0)
        with pytest.warns(UserWarning):
            assemble(domain, 1.0, basis, n_r=8, check_resolution=True)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assemble(domain, 1.0, basis, n_r=32, check_resolution=True)


class TestDiskSpectrum:
    @pytest.mark.parametrize("tau", [0.5, 1.0, 5.0])
    def test_matches_closed_form(self, tau):
        sol, _ = solve_domain(DISK, tau)
        ref = disk_reference(tau, 9)
        assert abs(sol.eigenvalues[0]) <= 1e-8 * max(1.0, tau)
        got = sol.eigenvalues[1:9]
        assert np.allclose(got, ref[1:9], rtol=1e-8), (tau, got - ref[1:9])

    def test_orthonormality_and_diagonalization(self):
        tau = 1.0
        basis = make_trial_basis(10, tau)
        forms = assemble(DISK, tau, basis)
        sol = solve(forms)
        X = sol.coefficients
        G = X.T @ forms.boundary_mass @ X
        assert np.abs(G - np.eye(G.shape[0])).max() < 1e-8
        H = X.T @ forms.stiffness @ X
        scale = max(1.0, abs(sol.eigenvalues).max())
        assert np.abs(H - np.diag(sol.eigenvalues)).max() < 1e-8 * scale

    def test_cluster_detection(self):
        sol, _ = solve_domain(DISK, 1.0)
        assert sol.cluster_of(1) == (1, 1)
        assert sol.cluster_of(2) == (2, 3)
        assert sol.cluster_of(3) == (2, 3)
        assert sol.cluster_of(4) == (4, 5)

    def test_diagnostics(self):
        sol, basis = solve_domain(DISK, 1.0)
        d = sol.diagnostics
        assert d.basis_size == basis.size
        assert d.filtered_dimension <= basis.size
        # boundary traces span only 2 k_max + 1 angular functions
        assert d.filtered_dimension - d.b_null_count == len(sol.eigenvalues)
        assert len(sol.eigenvalues) <= 2 * basis.k_max + 1

    def test_svd_tol_validation(self):
        basis = make_trial_basis(3, 1.0)
        forms = assemble(DISK, 1.0, basis)
        with pytest.raises(DomainValidationError):
            solve(forms, svd_tol=0.0)
        with pytest.raises(DomainValidationError):
            solve(forms, svd_tol=1.5)


class TestInvariances:
    def test_rotation(self):
        alpha = 0.37
        base = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.0, 0.1))
        rotated = StarDomain(
            a0=1.0,
            cos_coeffs=(0.0, 0.0, 0.1 * math.cos(3 * alpha)),
            sin_coeffs=(0.0, 0.0, 0.1 * math.sin(3 * alpha)),
        )
        s1, _ = solve_domain(base, 1.0, k_max=8)
        s2, _ = solve_domain(rotated, 1.0, k_max=8)
        assert np.allclose(s1.eigenvalues[:8], s2.eigenvalues[:8], rtol=1e-9)

    def test_translation(self):
        base = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.05))
        moved = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.05), center=(0.3, -0.2))
        s1, _ = solve_domain(base, 1.0, k_max=8)
        s2, _ = solve_domain(moved, 1.0, k_max=8)
        assert np.allclose(s1.eigenvalues[:8], s2.eigenvalues[:8], rtol=1e-9)

    def test_quadrature_refinement_stability(self):
        domain = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.05))
        s1, _ = solve_domain(domain, 1.0, n_r=32, n_theta=256, n_boundary=512)
        s2, _ = solve_domain(domain, 1.0, n_r=48, n_theta=384, n_boundary=1024)
        assert np.allclose(s1.eigenvalues[1:9], s2.eigenvalues[1:9], rtol=1e-8)

    def test_variational_upper_bound(self):
        # u = x - mean(x) is admissible for the first nonzero eigenvalue
        tau = 1.0
        domain = StarDomain(a0=1.0, cos_coeffs=(0.0, 0.07))
        bq = boundary_geometry(domain, 512)
        length = bq.weights.sum()
        xs = bq.points[:, 0] - (bq.weights @ bq.points[:, 0]) / length
        bound = tau * area(domain) / float(bq.weights @ xs**2)
        sol, _ = solve_domain(domain, tau)
        assert sol.eigenvalues[1] <= bound * (1.0 + 1e-10)


class TestBoundaryData:
    def test_orthonormal_traces(self):
        sol, basis = solve_domain(DISK, 1.0)
        traces = eigenfunction_boundary_data(sol, DISK, basis, which=(2, 3))
        w = traces.quad.weights
        assert float(w @ traces.values[0] ** 2) == pytest.approx(1.0, abs=1e-8)
        assert float(w @ traces.values[1] ** 2) == pytest.approx(1.0, abs=1e-8)
        assert float(w @ (traces.values[0] * traces.values[1])) == pytest.approx(0.0, abs=1e-8)

    def test_constant_mode(self):
        sol, basis = solve_domain(DISK, 1.0)
        traces = eigenfunction_boundary_data(sol, DISK, basis, which=(1,))
        want = 1.0 / math.sqrt(2.0 * np.pi)
        assert np.allclose(np.abs(traces.values[0]), want, atol=1e-9)
        assert np.abs(traces.normal_derivatives[0]).max() < 1e-8

    def test_normal_derivative_consistency(self):
        sol, basis = solve_domain(DISK, 1.0)
        traces = eigenfunction_boundary_data(sol, DISK, basis, which=(2,))
        manual = np.einsum("nc,nc->n", traces.gradients[0], traces.quad.normals)
        assert np.allclose(traces.normal_derivatives[0], manual, atol=1e-14)

    def test_index_validation(self):
        sol, basis = solve_domain(DISK, 1.0)
        with pytest.raises(DomainValidationError):
            eigenfunction_boundary_data(sol, DISK, basis, which=(0,))
        with pytest.raises(DomainValidationError):
            eigenfunction_boundary_data(sol, DISK, basis, which=(len(sol.eigenvalues) + 1,))
