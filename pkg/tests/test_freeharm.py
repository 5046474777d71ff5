import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import roots_legendre

from src.components.freeharm import (SubordinationSolver, _free_atoms, arcsine_moment, atoms, bbp_outliers,
                                     cauchy, closed_form_density_on, comparison_mask,
                                     deformed_nu_closed_form, deformed_typeB, detect_atoms,
                                     free_convolve, moments_from_transform, nu_j_density, nu_j_mass,
                                     nu_j_measure, outlier_position, perturbation_typeB, rademacher,
                                     rademacher_closed_form_density, reciprocal_cauchy, semicircle,
                                     stieltjes_invert, total_mass, typeB_convolve, wigner_nu)
from src.entity.config_entity import GridSpec
from src.entity.measure import PerturbationSpec, TypeBDistribution, WignerMomentParams
from src.exception import ConvergenceError, DomainError

GUE = WignerMomentParams(beta=2, sigma2=1.0, s2=1.0, alpha=2.0)
GOE = WignerMomentParams(beta=1, sigma2=1.0, s2=2.0, alpha=3.0)


def test_semicircle_transform_matches_quadrature():
    mu = semicircle(1.5)
    z = 0.7 + 0.4j
    re = quad(lambda t: (mu.density(t) / (z - t)).real, -3.0, 3.0)[0]
    im = quad(lambda t: (mu.density(t) / (z - t)).imag, -3.0, 3.0)[0]
    assert abs(cauchy(mu, z) - complex(re, im)) < 1e-8
    assert abs(reciprocal_cauchy(mu, z) * cauchy(mu, z) - 1.0) < 1e-14


def test_cauchy_needs_upper_half_plane():
    with pytest.raises(DomainError):
        cauchy(semicircle(1.0), 0.3 - 1e-3j)
    with pytest.raises(DomainError):
        cauchy(semicircle(1.0), np.array([1j, 0.5 + 0j]))


def test_cauchy_of_arrays_and_atoms():
    mu = atoms([(0.0, 0.25), (2.0, 0.75)])
    z = np.array([1j, 1.0 + 1j])
    expected = 0.25 / (z - 0.0) + 0.75 / (z - 2.0)
    assert np.allclose(cauchy(mu, z), expected)


def test_measure_constructors_validate():
    with pytest.raises(DomainError):
        semicircle(0.0)
    with pytest.raises(DomainError):
        atoms([(0.0, 0.5)])
    with pytest.raises(DomainError):
        atoms([])


def test_moments_and_mass_from_transforms():
    mu = semicircle(1.0)
    moments = moments_from_transform(lambda z: cauchy(mu, z), 4, radius=5.0)
    assert np.allclose(moments, [1.0, 0.0, 1.0, 0.0, 2.0], atol=1e-10)
    assert total_mass(mu) == 1.0
    assert abs(total_mass(rademacher()) - 1.0) < 1e-15
    assert arcsine_moment(4, 1.0) == 6.0
    assert arcsine_moment(3, 1.0) == 0.0


def test_stieltjes_inversion_of_the_semicircle():
    mu = semicircle(1.0)
    x = np.linspace(-1.8, 1.8, 37)
    density, err = stieltjes_invert(lambda z: cauchy(mu, z), x)
    assert np.max(np.abs(density - mu.density(x))) < 1e-3
    assert np.all(err >= 0)


def test_detect_atoms():
    mu = atoms([(0.0, 0.3), (1.0, 0.7)])
    found = detect_atoms(lambda z: cauchy(mu, z), [0.0, 0.5, 1.0])
    assert [loc for loc, _ in found] == [0.0, 1.0]
    assert abs(found[0][1] - 0.3) < 1e-6
    assert abs(found[1][1] - 0.7) < 1e-6


@pytest.mark.parametrize("eta", [0.01, 0.1, 1.0])
def test_subordination_residuals_and_herglotz_bound(eta):
    solver = SubordinationSolver(semicircle(1.0), rademacher())
    for x in np.linspace(-3.0, 3.0, 50):
        z = complex(x, eta)
        omega1, omega2 = solver.solve(z)
        assert omega1.imag >= eta - 1e-12 and omega2.imag >= eta - 1e-12
        g_gap, f_gap = solver.residuals(z)
        assert g_gap < 1e-10 and f_gap < 1e-10


def test_subordination_cache_is_bounded():
    solver = SubordinationSolver(semicircle(1.0), rademacher(), cache_size=8)
    points = [complex(x, 0.1) for x in np.linspace(-2.0, 2.0, 20)]
    first = [solver.solve(z) for z in points]
    assert solver.cached_points == 8
    # evicted points are solved again to the same values
    assert np.allclose(solver.solve(points[0]), first[0], atol=1e-10)


def test_threaded_grid_matches_serial():
    mu = semicircle(1.0)
    grid = GridSpec(lo=-1.5, hi=1.5, n=24)
    serial, _ = free_convolve(mu, rademacher(), grid, threads=1)
    pooled, _ = free_convolve(mu, rademacher(), grid, threads=4)
    assert np.allclose(serial.grid[1], pooled.grid[1], atol=1e-9)


def test_semicircle_plus_rademacher_matches_closed_form():
    grid = GridSpec(lo=-1.98, hi=1.98, n=100)
    result, pair = free_convolve(semicircle(1.0), rademacher(), grid)
    x, density = result.grid
    reference = rademacher_closed_form_density(x)
    # the closed form has a cube-root cusp at 0
    near_cusp = np.abs(x) <= 0.05
    assert near_cusp.any()
    assert np.max(np.abs(density[~near_cusp] - reference[~near_cusp])) < 1e-4
    assert np.max(np.abs(density[near_cusp] - reference[near_cusp])) < 1e-3
    assert result.atoms == ()
    assert max(max(pair.residual(complex(p, grid.eta_ladder[-1]))) for p in x) < 1e-9


def test_rademacher_closed_form_density_support():
    assert rademacher_closed_form_density([3.0])[0] == 0.0
    assert rademacher_closed_form_density([-1.0])[0] == pytest.approx(rademacher_closed_form_density([1.0])[0])
    assert rademacher_closed_form_density([1.0])[0] == pytest.approx(0.2371, abs=1e-4)


def test_free_convolution_with_a_point_mass_is_a_shift():
    mu = semicircle(1.0)
    grid = GridSpec(lo=-1.5, hi=1.5, n=31)
    shifted, _ = free_convolve(mu, atoms([(0.0, 1.0)]), grid)
    x, density = shifted.grid
    assert np.max(np.abs(density - mu.density(x))) < 1e-6
    assert abs(total_mass(shifted) - 1.0) < 1e-8


def test_free_convolution_moments_add_variances():
    result, _ = free_convolve(semicircle(1.0), rademacher(), GridSpec(lo=-1.0, hi=1.0, n=5))
    moments = moments_from_transform(result.transform, 2, radius=6.0)
    assert np.allclose(moments, [1.0, 0.0, 2.0], atol=1e-8)


def test_semicircles_add_in_quadrature():
    result, _ = free_convolve(semicircle(1.0), semicircle(1.0), GridSpec(lo=-2.5, hi=2.5, n=51))
    # semicircle(sqrt 2): m_2k = 2^k Catalan(k)
    moments = moments_from_transform(result.transform, 8, radius=6.0)
    assert np.allclose(moments, [1.0, 0.0, 2.0, 0.0, 8.0, 0.0, 40.0, 0.0, 224.0], atol=1e-4)
    x, density = result.grid
    assert np.max(np.abs(density - semicircle(np.sqrt(2.0)).density(x))) < 1e-4


def test_free_atoms_survive_when_weights_exceed_one():
    mu1 = atoms([(0.0, 0.8), (1.0, 0.2)])
    mu2 = atoms([(0.0, 0.6), (2.0, 0.4)])
    found = dict(_free_atoms(mu1, mu2))
    assert found == pytest.approx({0.0: 0.4, 2.0: 0.2})
    assert _free_atoms(semicircle(1.0), rademacher()) == ()


def test_bbp_outliers():
    pert = PerturbationSpec(thetas=(2.0, 0.5, -3.0))
    assert bbp_outliers(1.0, pert) == [(2.0, 2.5), (0.5, None), (-3.0, -3.0 - 1.0 / 3.0)]
    assert outlier_position(1.0, 1.0) == 2.0
    with pytest.raises(DomainError):
        bbp_outliers(0.0, pert)


@pytest.mark.parametrize("theta", [0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 2.0, -2.0, 4.0, -4.0])
def test_nu_j_mass_is_one_or_zero(theta):
    expected = 1.0 if abs(theta) >= 1.0 else 0.0
    assert abs(nu_j_mass(theta, 1.0) - expected) < 1e-6


def test_nu_j_measure():
    nu = nu_j_measure(0.5, 1.0)
    assert nu.positive_part == (-2.0, 1.0)
    assert nu_j_density(0.5, 1.0, 0.0) > 0
    assert nu_j_density(0.5, 1.0, 1.5) < 0
    assert abs(total_mass(nu)) < 1e-6

    edge = nu_j_measure(1.0, 1.0)
    assert edge.atoms == ((2.0, 0.5),)
    with pytest.raises(DomainError):
        nu_j_measure(0.0, 1.0)
    with pytest.raises(DomainError):
        nu_j_density(2.0, 1.0, 2.0)


def test_nu_j_transform_matches_quadrature():
    nu = nu_j_measure(2.0, 1.0)
    z = 0.3 + 0.5j
    u, w = roots_legendre(400)
    u, w = u * np.pi / 2.0, w * np.pi / 2.0
    t = 2.0 * np.sin(u)
    reference = np.sum(nu_j_density(2.0, 1.0, t) * 2.0 * np.cos(u) * w / (z - t))
    assert abs(cauchy(nu, z) - reference) < 1e-8


def test_wigner_nu_vanishes_for_gue():
    nu = wigner_nu(GUE)
    t = np.linspace(-1.99, 1.99, 101)
    assert np.max(np.abs(nu.density(t))) < 1e-12
    assert nu.atoms == ()


def test_wigner_nu_for_goe():
    for sigma2 in (1.0, 2.0):
        params = WignerMomentParams(beta=1, sigma2=sigma2, s2=2.0 * sigma2, alpha=3.0 * sigma2 ** 2)
        nu = wigner_nu(params)
        sigma = np.sqrt(sigma2)
        t = np.linspace(-1.99, 1.99, 101) * sigma
        expected = -0.5 / (np.pi * np.sqrt(4.0 * sigma2 - t * t))
        assert np.max(np.abs(nu.density(t) - expected)) < 1e-10
        assert nu.atoms == ((-2.0 * sigma, 0.25), (2.0 * sigma, 0.25))
        assert abs(total_mass(nu)) < 1e-8


def test_perturbation_type_b_law():
    law = perturbation_typeB(PerturbationSpec(thetas=(2.0, 3.0)))
    assert law.mu.atoms == ((0.0, 1.0),)
    assert law.nu.atoms == ((0.0, -2.0), (2.0, 1.0), (3.0, 1.0))
    delocalized = perturbation_typeB(PerturbationSpec(delocalized_theta=2.0))
    assert delocalized.nu.atoms == ((0.0, -1.0), (2.0, 1.0))


def test_type_b_convolution_with_the_null_law_is_the_identity():
    grid = GridSpec(lo=-1.5, hi=1.5, n=31)
    law = typeB_convolve(TypeBDistribution(mu=semicircle(1.0)), TypeBDistribution(mu=atoms([(0.0, 1.0)])), grid)
    x, density = law.mu.grid
    assert np.max(np.abs(density - semicircle(1.0).density(x))) < 1e-6
    assert law.nu.atoms == ()
    assert np.all(law.nu.grid[1] == 0.0)
    assert law.nu.transform(0.3 + 1j) == 0


def test_type_b_convolution_places_the_outlier_atom():
    base = TypeBDistribution(mu=semicircle(1.0))
    law = typeB_convolve(base, perturbation_typeB(PerturbationSpec(thetas=(2.0,))), GridSpec())
    assert len(law.nu.atoms) == 1
    loc, weight = law.nu.atoms[0]
    assert abs(loc - 2.5) < 1e-6
    assert abs(weight - 1.0) < 1e-3
    # delta_2.5 - nu_2 from the transform itself, not the closed form
    assert abs(total_mass(law.nu)) < 1e-6


def test_deformed_type_b_matches_closed_form():
    grid = GridSpec()
    law = deformed_typeB(1.0, pert=PerturbationSpec(thetas=(2.0,)), grid=grid)
    assert law.nu.atoms == ((2.5, 1.0),)
    x, numeric = law.nu.grid
    mask = comparison_mask(x, 1.0, law.nu.atoms)
    closed = closed_form_density_on(law.nu, x[mask], 1.0)
    assert np.max(np.abs(numeric[mask] - closed)) < 1e-3
    # delta_2.5 - nu_2 has mass zero
    assert abs(total_mass(law.nu)) < 1e-6


def test_deformed_type_b_over_goe():
    law = deformed_typeB(1.0, base_nu=wigner_nu(GOE), pert=PerturbationSpec(thetas=(2.0,)),
                         grid=GridSpec(n=121))
    assert dict(law.nu.atoms) == pytest.approx({-2.0: 0.25, 2.0: 0.25, 2.5: 1.0})


def test_closed_form_needs_closed_base():
    grid = GridSpec(lo=-1.0, hi=1.0, n=3)
    typeb = typeB_convolve(TypeBDistribution(mu=semicircle(1.0)),
                           perturbation_typeB(PerturbationSpec(thetas=(2.0,))), grid)
    with pytest.raises(DomainError):
        deformed_nu_closed_form(1.0, typeb.nu, PerturbationSpec(thetas=(2.0,)))


def test_convergence_error_carries_points():
    error = ConvergenceError("no fixed point", points=[0.1 + 1e-6j])
    assert error.exit_code == 5
    assert error.points == [0.1 + 1e-6j]
