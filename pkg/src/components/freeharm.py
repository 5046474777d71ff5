"""
Cauchy transforms, free and type B additive convolution by subordination, BBP
outliers and the closed-form infinitesimal densities of deformed Wigner matrices.

Conventions: G(z) = int mu(dt) / (z - t) on the upper half-plane, F = 1/G. The
arcsine law of radius 2*sigma, a(t) = 1 / (pi sqrt(4 sigma^2 - t^2)), has
G_a(z) = 1 / sqrt(z^2 - 4 sigma^2) with the branch G_a ~ 1/z at infinity.
"""
import math
import sys
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.special import roots_legendre

from src.constants import *
from src.entity.config_entity import GridSpec
from src.entity.measure import (ZERO_MEASURE, Atom, Measure, PerturbationSpec, SignedMeasure,
                                SubordinationPair, TypeBDistribution, WignerMomentParams)
from src.exception import ConvergenceError, DomainError, NumericalSolverError
from src.logger import logging

# distance from the spectral edges and from atoms excluded when comparing densities
EDGE_WINDOW: float = 0.05


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def semicircle(sigma: float = 1.0) -> Measure:
    if sigma <= 0:
        raise DomainError(f"semicircle radius parameter must be positive, got {sigma}", sys)
    s2 = sigma * sigma

    def density(t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(np.clip(4.0 * s2 - t * t, 0.0, None)) / (2.0 * np.pi * s2)

    return Measure(density=density, support=(-2.0 * sigma, 2.0 * sigma),
                   kind="semicircle", params=(("sigma", float(sigma)),))


def atoms(pairs: Iterable[Sequence[float]]) -> Measure:
    """A purely atomic probability measure from (location, weight) pairs."""
    pairs = tuple((float(loc), float(w)) for loc, w in pairs)
    if not pairs:
        raise DomainError("an atomic measure needs at least one atom", sys)
    mass = sum(w for _, w in pairs)
    if abs(mass - 1.0) > MASS_TOL:
        raise DomainError(f"atom weights sum to {mass}, expected 1", sys)
    return Measure(atoms=pairs, kind="atoms")


def rademacher() -> Measure:
    return atoms(((-1.0, 0.5), (1.0, 0.5)))


def rademacher_closed_form_density(t) -> np.ndarray:
    """
    Density of semicircle(1) boxplus (delta_{-1} + delta_{+1})/2, supported on |t| < sqrt(27)/2:

        1/(2 pi sqrt 3) [ A / 2^(1/3) - 2^(1/3) t^2 / A ],
        A = (27|t| - 2|t|^3 + 3 sqrt(3) |t| sqrt(27 - 4 t^2))^(1/3).
    """
    t = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
    out = np.zeros_like(t)
    inside = 4.0 * t * t < 27.0
    ti = t[inside]
    cube = 27.0 * ti - 2.0 * ti ** 3 + 3.0 * np.sqrt(3.0) * ti * np.sqrt(27.0 - 4.0 * ti * ti)
    a = np.cbrt(cube)
    two_third = np.cbrt(2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = (a / two_third - two_third * ti * ti / a) / (2.0 * np.pi * np.sqrt(3.0))
    out[inside] = np.where(a > 0, value, 0.0)
    return out


def _sqrt_product(z, sigma: float):
    # sqrt(z - 2s) sqrt(z + 2s): behaves like z at infinity, cut on [-2s, 2s]
    return np.sqrt(z - 2.0 * sigma) * np.sqrt(z + 2.0 * sigma)


def _semicircle_transform(z, sigma: float):
    return (z - _sqrt_product(z, sigma)) / (2.0 * sigma * sigma)


def arcsine_transform(z, sigma: float):
    return 1.0 / _sqrt_product(z, sigma)


def _arcsine_transform_real(x: float, sigma: float) -> float:
    if abs(x) <= 2.0 * sigma:
        raise DomainError(f"arcsine transform at {x} lies on the support [-{2 * sigma}, {2 * sigma}]", sys)
    return math.copysign(1.0, x) / math.sqrt(x * x - 4.0 * sigma * sigma)


def arcsine_moment(n: int, sigma: float) -> float:
    """int t^n a(t) dt = sigma^n C(n, n/2) for even n, 0 for odd n."""
    if n % 2:
        return 0.0
    return sigma ** n * math.comb(n, n // 2)


def _poly_arcsine_transform(coeffs: Sequence[float], z, sigma: float):
    """Transform of p(t) a(t) dt, p(t) = sum_k coeffs[k] t^k, reduced against G_a."""
    z = np.asarray(z, dtype=complex)
    p_z = sum(c * z ** k for k, c in enumerate(coeffs))
    correction = 0
    for k, c in enumerate(coeffs):
        for j in range(k):
            correction = correction + c * z ** j * arcsine_moment(k - 1 - j, sigma)
    return p_z * arcsine_transform(z, sigma) - correction


def _arcsine_density(t, sigma: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= 2.0 * sigma):
        raise DomainError(f"density evaluated outside the open support (-{2 * sigma}, {2 * sigma})", sys)
    return 1.0 / (np.pi * np.sqrt(4.0 * sigma * sigma - t * t))


# ---------------------------------------------------------------------------
# Cauchy transforms
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _sine_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes for u in [-pi/2, pi/2]."""
    x, w = roots_legendre(n)
    return x * np.pi / 2.0, w * np.pi / 2.0


def _quadrature_transform(density: Callable, support: Tuple[float, float], z: np.ndarray,
                          nodes: int = QUADRATURE_NODES) -> np.ndarray:
    # t = mid + half sin(u) removes square-root and inverse-square-root edge behaviour
    lo, hi = support
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    u, w = _sine_nodes(nodes)
    t = mid + half * np.sin(u)
    weights = density(t) * half * np.cos(u) * w
    return np.sum(weights / (z[..., None] - t), axis=-1)


def _evaluate(transform: Callable, z: np.ndarray) -> np.ndarray:
    if z.ndim == 0:
        return np.asarray(transform(complex(z)))
    return np.array([transform(complex(v)) for v in z.ravel()]).reshape(z.shape)


def _cauchy_unchecked(m: Measure, z: np.ndarray) -> np.ndarray:
    if m.transform is not None:
        return _evaluate(m.transform, z)

    total = np.zeros(z.shape, dtype=complex)
    for loc, weight in m.atoms:
        total = total + weight / (z - loc)

    if m.kind == "semicircle":
        total = total + _semicircle_transform(z, m.param("sigma"))
    elif m.ac_transform is not None:
        total = total + m.ac_transform(z)
    elif m.density is not None:
        total = total + _quadrature_transform(m.density, m.support, z)
    elif m.grid is not None:
        x, values = m.grid
        total = total + trapezoid(values / (z[..., None] - x), x, axis=-1)
    return total


def cauchy(m: Measure, z):
    """G_m(z) for Im z > 0; scalars give a complex, arrays an array."""
    zz = np.asarray(z, dtype=complex)
    if np.any(zz.imag <= 0):
        raise DomainError(f"Cauchy transform needs Im z > 0, got {z}", sys)
    value = _cauchy_unchecked(m, zz)
    return complex(value) if zz.ndim == 0 else value


def reciprocal_cauchy(m: Measure, z) -> complex:
    return 1.0 / cauchy(m, z)


def total_mass(m: Measure, radius: Optional[float] = None) -> float:
    """Atoms plus the integral of the ac part (quadrature, grid trapezoid or contour)."""
    mass = m.atom_mass
    if m.transform is not None:
        r = radius if radius is not None else _enclosing_radius(m)
        return float(moments_from_transform(m.transform, 0, r)[0])
    if m.kind == "semicircle":
        return mass + 1.0
    if m.density is not None:
        lo, hi = m.support
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        u, w = _sine_nodes(QUADRATURE_NODES)
        return mass + float(np.sum(m.density(mid + half * np.sin(u)) * half * np.cos(u) * w))
    if m.grid is not None:
        x, values = m.grid
        return mass + float(trapezoid(values, x))
    return mass


def _enclosing_radius(m: Measure) -> float:
    extent = [abs(loc) for loc, _ in m.atoms]
    if m.support is not None:
        extent.extend(abs(s) for s in m.support)
    if m.grid is not None:
        extent.extend([abs(m.grid[0][0]), abs(m.grid[0][-1])])
    return 1.5 * max(extent, default=1.0) + 1.0


def moments_from_transform(transform: Callable[[complex], complex], max_order: int,
                           radius: float, nodes: int = 256) -> np.ndarray:
    """
    m_k = (1/2 pi i) closed-integral z^k G(z) dz on |z| = radius, k = 0..max_order.

    Only the upper half circle is evaluated; the lower half follows from G(conj z) = conj G(z).
    """
    phi = np.pi * (np.arange(nodes) + 0.5) / nodes
    z = radius * np.exp(1j * phi)
    g = np.array([transform(complex(v)) for v in z])
    return np.array([float(np.real(np.sum(z ** (k + 1) * g)) / nodes) for k in range(max_order + 1)])


# ---------------------------------------------------------------------------
# Stieltjes inversion and atoms
# ---------------------------------------------------------------------------

def _map_points(func: Callable[[float], float], x: np.ndarray, threads: int) -> Tuple[np.ndarray, List[float]]:
    failures: List[float] = []

    def _one(point):
        try:
            return func(point)
        except ConvergenceError as e:
            failures.append(float(point))
            logging.debug(f"no convergence at x={point}: {e.error_message}")
            return np.nan

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(_one, x))
    else:
        values = [_one(point) for point in x]
    return np.asarray(values, dtype=float), failures


def stieltjes_invert(evaluator: Callable[[complex], complex], x,
                     eta_ladder: Sequence[float] = STIELTJES_ETA_LADDER,
                     threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    density(x) = -(1/pi) Im G(x + i eta) extrapolated to eta = 0 linearly from the
    last two rungs; error = difference between those rungs.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(eta_ladder) < 2:
        raise DomainError("eta ladder needs at least two rungs", sys)

    rungs = []
    failures: List[float] = []
    for i in range(len(eta_ladder)):
        values, failed = _map_points(lambda p, i=i: -np.imag(evaluator(complex(p, eta_ladder[i]))) / np.pi,
                                     x, threads)
        rungs.append(values)
        failures.extend(failed)
    if failures:
        raise ConvergenceError(f"subordination failed at {len(set(failures))} grid points",
                               points=sorted(set(failures)))

    prev, last = rungs[-2], rungs[-1]
    ratio = eta_ladder[-2] / eta_ladder[-1]
    density = (ratio * last - prev) / (ratio - 1.0)
    return density, np.abs(last - prev)


def detect_atoms(evaluator: Callable[[complex], complex], candidates: Iterable[float],
                 eta_ladder: Sequence[float] = SUBORDINATION_ETA_LADDER,
                 threshold: float = ATOM_THRESHOLD) -> List[Atom]:
    """
    x is an atom when -eta Im G(x + i eta) stays above ``threshold`` in size and
    stable across the ladder; the weight is its linear extrapolation to eta = 0.
    """
    found: List[Atom] = []
    ratio = eta_ladder[-2] / eta_ladder[-1]
    for x in candidates:
        scaled = [-eta * np.imag(evaluator(complex(x, eta))) for eta in eta_ladder]
        if min(abs(s) for s in scaled) <= threshold:
            continue
        if abs(scaled[-1] - scaled[-2]) > 0.1 * abs(scaled[-1]):
            continue
        weight = (ratio * scaled[-1] - scaled[-2]) / (ratio - 1.0)
        found.append((float(x), float(weight)))
    return found


# ---------------------------------------------------------------------------
# subordination
# ---------------------------------------------------------------------------

class SubordinationSolver:
    """
    Solves omega_1 + omega_2 = z + F_1(omega_1), F_1(omega_1) = F_2(omega_2) pointwise.

    omega_2 is the fixed point of w -> H_1(H_2(w)) with H_i(w) = F_i(w) - w + z and
    omega_1 = H_2(omega_2). The iteration is started at Im z >= 1 and continued down to
    the requested Im z with Newton steps; a stall is damped by 1/2.
    """

    def __init__(self, mu1: Measure, mu2: Measure,
                 tol: float = SUBORDINATION_TOL,
                 max_iter: int = SUBORDINATION_MAX_ITER,
                 newton_steps: int = SUBORDINATION_NEWTON_STEPS,
                 residual_tol: float = SUBORDINATION_RESIDUAL_TOL,
                 cache_size: int = SUBORDINATION_CACHE_SIZE):
        self.mu1 = mu1
        self.mu2 = mu2
        self.tol = tol
        self.max_iter = max_iter
        self.newton_steps = newton_steps
        self.residual_tol = residual_tol
        self.cache_size = cache_size
        # grid points are solved from worker threads
        self._lock = threading.Lock()
        self._solutions: "OrderedDict[complex, Tuple[complex, complex]]" = OrderedDict()
        self._warm: "OrderedDict[float, complex]" = OrderedDict()

    def _remember(self, z: complex, omega1: complex, omega2: complex) -> None:
        with self._lock:
            self._solutions[z] = (omega1, omega2)
            self._warm[z.real] = omega2
            while len(self._solutions) > self.cache_size:
                self._solutions.popitem(last=False)
            while len(self._warm) > self.cache_size:
                self._warm.popitem(last=False)

    @property
    def cached_points(self) -> int:
        with self._lock:
            return len(self._solutions)

    def _h(self, m: Measure, w: complex, z: complex) -> complex:
        return 1.0 / cauchy(m, w) - w + z

    def _map(self, w: complex, z: complex) -> complex:
        return self._h(self.mu1, self._h(self.mu2, w, z), z)

    def _fixed_point(self, z: complex, w: complex) -> Tuple[complex, bool]:
        previous = math.inf
        for _ in range(self.max_iter):
            target = self._map(w, z)
            step = abs(target - w)
            if step > previous:
                target = w + 0.5 * (target - w)
            w = target
            if step < self.tol * (1.0 + abs(w)):
                return w, True
            previous = step
        return w, False

    def _newton(self, z: complex, w: complex) -> Tuple[complex, bool]:
        for _ in range(self.newton_steps):
            g = w - self._map(w, z)
            if abs(g) <= self.tol * (1.0 + abs(w)):
                return w, True
            h = DERIVATIVE_STEP * (1.0 + abs(w))
            dg = ((w + h - self._map(w + h, z)) - (w - h - self._map(w - h, z))) / (2.0 * h)
            if dg == 0:
                return w, False
            delta = g / dg
            scale = 1.0
            while scale > 1e-4:
                candidate = w - scale * delta
                if candidate.imag > 0 and abs(candidate - self._map(candidate, z)) < abs(g):
                    break
                scale /= 2.0
            else:
                return w, abs(g) <= self.residual_tol
            w = candidate
        return w, abs(w - self._map(w, z)) <= self.residual_tol

    def _continue_down(self, z: complex) -> complex:
        top = max(1.0, z.imag)
        levels = [top]
        while levels[-1] / 10.0 > z.imag:
            levels.append(levels[-1] / 10.0)
        if levels[-1] != z.imag:
            levels.append(z.imag)

        start = complex(z.real, top)
        w, _ = self._fixed_point(start, start)
        w, _ = self._newton(start, w)
        for y in levels[1:]:
            zl = complex(z.real, y)
            w, ok = self._newton(zl, w)
            if not ok:
                w, _ = self._fixed_point(zl, w)
                w, _ = self._newton(zl, w)
        return w

    def solve(self, z: complex, start: Optional[complex] = None) -> Tuple[complex, complex]:
        """(omega_1(z), omega_2(z))."""
        z = complex(z)
        if z.imag <= 0:
            raise DomainError(f"subordination needs Im z > 0, got {z}", sys)
        with self._lock:
            cached = self._solutions.get(z)
            if start is None:
                start = self._warm.get(z.real)
        if cached is not None:
            return cached

        w, ok = (start, False) if start is None else self._newton(z, start)
        if not ok:
            w = self._continue_down(z)

        residual = abs(w - self._map(w, z))
        if not np.isfinite(residual) or residual > self.residual_tol:
            raise ConvergenceError(f"subordination residual {residual:.3e} at z={z}", points=[z])
        omega1 = self._h(self.mu2, w, z)
        self._remember(z, omega1, w)
        return omega1, w

    def omega1(self, z: complex) -> complex:
        return self.solve(z)[0]

    def omega2(self, z: complex) -> complex:
        return self.solve(z)[1]

    def derivative(self, z: complex) -> Tuple[complex, complex]:
        """Central differences along the real direction, h = 1e-6 (1 + |z|)."""
        z = complex(z)
        h = DERIVATIVE_STEP * (1.0 + abs(z))
        _, w = self.solve(z)
        plus = self.solve(z + h, start=w)
        minus = self.solve(z - h, start=w)
        return (plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h)

    def residuals(self, z: complex) -> Tuple[float, float]:
        """(|G_1(omega_1) - G_2(omega_2)|, |omega_1 + omega_2 - z - F_1(omega_1)|)."""
        omega1, omega2 = self.solve(z)
        g1 = cauchy(self.mu1, omega1)
        g2 = cauchy(self.mu2, omega2)
        return abs(g1 - g2), abs(omega1 + omega2 - complex(z) - 1.0 / g1)

    def pair(self) -> SubordinationPair:
        return SubordinationPair(
            omega1=self.omega1,
            omega2=self.omega2,
            omega1_prime=lambda z: self.derivative(z)[0],
            omega2_prime=lambda z: self.derivative(z)[1],
            residual=self.residuals,
        )


def _free_atoms(mu1: Measure, mu2: Measure) -> Tuple[Atom, ...]:
    # mu1 boxplus mu2 has an atom at a + b exactly when mu1({a}) + mu2({b}) > 1
    merged: Dict[float, float] = {}
    for a, wa in mu1.atoms:
        for b, wb in mu2.atoms:
            if wa + wb > 1.0 + 1e-12:
                merged[a + b] = merged.get(a + b, 0.0) + wa + wb - 1.0
    return tuple(sorted(merged.items()))


def _minus_atoms(transform: Callable[[complex], complex], atom_list: Sequence[Atom]) -> Callable[[complex], complex]:
    def _ac(z: complex) -> complex:
        return transform(z) - sum(w / (z - loc) for loc, w in atom_list)
    return _ac


def free_convolve(mu1: Measure, mu2: Measure, grid: GridSpec = GridSpec(),
                  threads: int = 1) -> Tuple[Measure, SubordinationPair]:
    """mu1 boxplus mu2 with G(z) = G_1(omega_1(z)); density recovered on ``grid``."""
    if mu1.signed or mu2.signed:
        raise DomainError("free convolution takes probability measures", sys)
    logging.info(f"Free convolution {mu1.kind} boxplus {mu2.kind} on {grid.n} points")
    solver = SubordinationSolver(mu1, mu2)

    def transform(z: complex) -> complex:
        return cauchy(mu1, solver.omega1(z))

    atom_list = _free_atoms(mu1, mu2)
    x = grid.points
    density, error = stieltjes_invert(_minus_atoms(transform, atom_list), x, grid.eta_ladder, threads)
    result = Measure(atoms=atom_list, kind="free_convolution", transform=transform,
                     grid=(x, density), grid_error=error, support=(grid.lo, grid.hi))
    return result, solver.pair()


def _real_crossings(omega: Callable[[complex], complex], level: float, x: np.ndarray) -> List[float]:
    """Real x where omega(x + i0) is real and equals ``level``."""
    eta = ATOM_SEARCH_ETA
    values = np.array([omega(complex(p, eta)) for p in x])
    real = np.abs(values.imag) < 1e-6 * (1.0 + np.abs(values))
    f = values.real - level

    roots: List[float] = []
    for i in range(len(x)):
        if real[i] and f[i] == 0.0:
            roots.append(float(x[i]))
        elif i + 1 < len(x) and real[i] and real[i + 1] and f[i] * f[i + 1] < 0:
            root = brentq(lambda s: omega(complex(s, eta)).real - level, x[i], x[i + 1], xtol=1e-13)
            roots.append(float(root))
    return roots


def typeB_convolve(a: TypeBDistribution, b: TypeBDistribution, grid: GridSpec = GridSpec(),
                   threads: int = 1) -> TypeBDistribution:
    """
    (mu_a, nu_a) boxplus_B (mu_b, nu_b):

        G_nu(z) = G_nu_a(omega_a(z)) omega_a'(z) + G_nu_b(omega_b(z)) omega_b'(z).

    Atoms of nu sit where omega_a or omega_b reaches an atom of nu_a or nu_b on the
    real axis; each is confirmed by the eta-scaled blow-up of Im G_nu.
    """
    mu, pair = free_convolve(a.mu, b.mu, grid, threads)

    def nu_transform(z: complex) -> complex:
        value = 0j
        if a.nu.atoms or a.nu.has_ac_part or a.nu.transform is not None:
            value += cauchy(a.nu, pair.omega1(z)) * pair.omega1_prime(z)
        if b.nu.atoms or b.nu.has_ac_part or b.nu.transform is not None:
            value += cauchy(b.nu, pair.omega2(z)) * pair.omega2_prime(z)
        return value

    x = grid.points
    found: Dict[float, float] = {}
    for nu, omega in ((a.nu, pair.omega1), (b.nu, pair.omega2)):
        for loc, weight in nu.atoms:
            for root in _real_crossings(omega, loc, x):
                if detect_atoms(nu_transform, [root], grid.eta_ladder):
                    key = round(root, 10)
                    found[key] = found.get(key, 0.0) + weight
    atom_list = tuple(sorted((loc, w) for loc, w in found.items() if abs(w) > MASS_TOL))
    for loc, w in atom_list:
        logging.info(f"Type B atom at {loc:.6f} with weight {w:.6f}")

    density, error = stieltjes_invert(_minus_atoms(nu_transform, atom_list), x, grid.eta_ladder, threads)
    nu = SignedMeasure(atoms=atom_list, kind="typeB", transform=nu_transform,
                       grid=(x, density), grid_error=error, support=(grid.lo, grid.hi))
    return TypeBDistribution(mu=mu, nu=nu)


# ---------------------------------------------------------------------------
# outliers and closed-form infinitesimal densities
# ---------------------------------------------------------------------------

def outlier_position(theta: float, sigma: float) -> float:
    return theta + sigma * sigma / theta


def bbp_outliers(sigma: float, pert: PerturbationSpec) -> List[Tuple[float, Optional[float]]]:
    """(theta, theta + sigma^2/theta) when |theta| >= sigma, (theta, None) otherwise."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}", sys)
    return [(theta, outlier_position(theta, sigma) if abs(theta) >= sigma else None)
            for theta in pert.all_thetas]


def _nu_j_constants(theta: float, sigma: float) -> Tuple[float, float]:
    # theta(t - 2 theta) / (2 (theta (t - theta) - sigma^2)) = 1/2 + c / (t - rho)
    rho = outlier_position(theta, sigma)
    c = (sigma * sigma - theta * theta) / (2.0 * theta)
    return c, rho


def nu_j_density(theta: float, sigma: float, t) -> np.ndarray:
    """theta (t - 2 theta) / (2 pi (theta (t - theta) - sigma^2) sqrt(4 sigma^2 - t^2)) on (-2 sigma, 2 sigma)."""
    if theta == 0:
        raise DomainError("theta must be nonzero", sys)
    t = np.asarray(t, dtype=float)
    arcsine = _arcsine_density(t, sigma)
    return theta * (t - 2.0 * theta) / (2.0 * (theta * (t - theta) - sigma * sigma)) * arcsine


def nu_j_mass(theta: float, sigma: float) -> float:
    """Quadrature in t = 2 sigma sin u, plus the edge atom 1/2 at |theta| = sigma."""
    if theta == 0:
        raise DomainError("theta must be nonzero", sys)
    c, rho = _nu_j_constants(theta, sigma)
    u, w = _sine_nodes(QUADRATURE_NODES)
    t = 2.0 * sigma * np.sin(u)
    ac = float(np.sum((0.5 + c / (t - rho)) * w) / np.pi)
    return ac + (0.5 if abs(theta) == sigma else 0.0)


def nu_j_measure(theta: float, sigma: float) -> SignedMeasure:
    """
    nu_j: a probability measure for |theta| >= sigma, mass zero for |theta| < sigma.

    At |theta| = sigma the density degenerates to a(t)/2 and the weak limit from
    |theta| > sigma leaves mass 1/2 at the edge 2 sigma sign(theta).
    """
    if theta == 0:
        raise DomainError("theta must be nonzero", sys)
    c, rho = _nu_j_constants(theta, sigma)
    edge = abs(theta) == sigma

    def density(t):
        return nu_j_density(theta, sigma, t)

    def ac_transform(z):
        g = arcsine_transform(z, sigma)
        if edge:
            return 0.5 * g
        return 0.5 * g + c * (g - _arcsine_transform_real(rho, sigma)) / (z - rho)

    if 0 < theta < sigma:
        positive = (-2.0 * sigma, 2.0 * theta)
    elif -sigma < theta < 0:
        positive = (2.0 * theta, 2.0 * sigma)
    else:
        positive = (-2.0 * sigma, 2.0 * sigma)

    return SignedMeasure(
        atoms=((math.copysign(2.0 * sigma, theta), 0.5),) if edge else (),
        density=density,
        support=(-2.0 * sigma, 2.0 * sigma),
        kind="nu_j",
        params=(("theta", float(theta)), ("sigma", float(sigma))),
        ac_transform=ac_transform,
        positive_part=positive,
    )


def _wigner_coefficients(params: WignerMomentParams) -> Tuple[float, float, float]:
    """Coefficients of (t/sigma)^0, (t/sigma)^2, (t/sigma)^4 in the bracket of nu_ac."""
    a = params.alpha / params.sigma2 ** 2
    s = params.s2 / params.sigma2
    beta = params.beta
    return 2.0 * (a - s - 2.0) + beta, s - 4.0 * a - 3.0 * beta + 13.0, a + beta - 4.0


def wigner_nu(params: WignerMomentParams) -> SignedMeasure:
    """
    nu = 1/2 [ 1{beta=1}/2 (delta_{-2 sigma} + delta_{2 sigma}) + nu_ac ],

        nu_ac = [k4 (t/sigma)^4 + k2 (t/sigma)^2 + k0] / (pi sqrt(4 sigma^2 - t^2)) dt,

    with k4 = a + beta - 4, k2 = s - 4a - 3 beta + 13, k0 = 2(a - s - 2) + beta,
    a = alpha/sigma^4, s = s^2/sigma^2. The ac part has mass beta - 2, so the edge
    atoms carry 1/4 each when beta = 1 and the total mass is zero.
    """
    sigma = math.sqrt(params.sigma2)
    k0, k2, k4 = _wigner_coefficients(params)
    coeffs = (0.5 * k0, 0.0, 0.5 * k2 / sigma ** 2, 0.0, 0.5 * k4 / sigma ** 4)

    def density(t):
        t = np.asarray(t, dtype=float)
        poly = sum(c * t ** k for k, c in enumerate(coeffs))
        return poly * _arcsine_density(t, sigma)

    def ac_transform(z):
        return _poly_arcsine_transform(coeffs, z, sigma)

    edge_atoms = ((-2.0 * sigma, 0.25), (2.0 * sigma, 0.25)) if params.beta == 1 else ()
    return SignedMeasure(
        atoms=edge_atoms,
        density=density,
        support=(-2.0 * sigma, 2.0 * sigma),
        kind="wigner_nu",
        params=(("beta", float(params.beta)), ("sigma2", params.sigma2),
                ("s2", params.s2), ("alpha", params.alpha)),
        ac_transform=ac_transform,
    )


def perturbation_typeB(pert: PerturbationSpec) -> TypeBDistribution:
    """(delta_0, sum_j (delta_theta_j - delta_0)): the type B law of sum_j theta_j E^(j,j)."""
    weights: Dict[float, float] = {}
    for theta in pert.all_thetas:
        weights[theta] = weights.get(theta, 0.0) + 1.0
        weights[0.0] = weights.get(0.0, 0.0) - 1.0
    nu_atoms = tuple(sorted((loc, w) for loc, w in weights.items() if w != 0.0))
    nu = SignedMeasure(atoms=nu_atoms, kind="atoms") if nu_atoms else ZERO_MEASURE
    return TypeBDistribution(mu=atoms(((0.0, 1.0),)), nu=nu)


def deformed_nu_closed_form(sigma: float, base_nu: SignedMeasure, pert: PerturbationSpec) -> SignedMeasure:
    """base_nu + sum_{|theta_j| >= sigma} delta_{theta_j + sigma^2/theta_j} - sum_j nu_j."""
    if base_nu.transform is not None:
        raise DomainError(f"base infinitesimal law {base_nu.kind!r} has no closed form", sys)
    parts = [nu_j_measure(theta, sigma) for theta in pert.all_thetas]

    weights: Dict[float, float] = {}
    for loc, w in base_nu.atoms:
        weights[loc] = weights.get(loc, 0.0) + w
    for theta, position in bbp_outliers(sigma, pert):
        if position is not None:
            weights[position] = weights.get(position, 0.0) + 1.0
    for part in parts:
        for loc, w in part.atoms:
            weights[loc] = weights.get(loc, 0.0) - w
    atom_list = tuple(sorted((loc, w) for loc, w in weights.items() if abs(w) > 1e-15))

    def density(t):
        t = np.asarray(t, dtype=float)
        value = base_nu.density(t) if base_nu.density is not None else np.zeros_like(t)
        for part in parts:
            value = value - part.density(t)
        return value

    def ac_transform(z):
        z = np.asarray(z, dtype=complex)
        value = base_nu.ac_transform(z) if base_nu.ac_transform is not None else np.zeros(z.shape, dtype=complex)
        for part in parts:
            value = value - part.ac_transform(z)
        return value

    return SignedMeasure(atoms=atom_list, density=density, support=(-2.0 * sigma, 2.0 * sigma),
                         kind="deformed", params=(("sigma", float(sigma)),), ac_transform=ac_transform)


def comparison_mask(x: np.ndarray, sigma: float, atom_list: Sequence[Atom] = ()) -> np.ndarray:
    """Grid points away from the spectral edges and from atoms."""
    x = np.asarray(x, dtype=float)
    keep = np.abs(np.abs(x) - 2.0 * sigma) > EDGE_WINDOW
    for loc, _ in atom_list:
        keep &= np.abs(x - loc) > EDGE_WINDOW
    return keep


def closed_form_density_on(nu: SignedMeasure, x: np.ndarray, sigma: float) -> np.ndarray:
    """Ac density of a closed-form nu on a grid, zero outside (-2 sigma, 2 sigma)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 2.0 * sigma
    if nu.density is not None and np.any(inside):
        out[inside] = nu.density(x[inside])
    return out


def deformed_typeB(sigma: float, base_nu: SignedMeasure = ZERO_MEASURE,
                   pert: PerturbationSpec = PerturbationSpec(),
                   grid: GridSpec = GridSpec(), threads: int = 1,
                   tolerance: float = 1e-4) -> TypeBDistribution:
    """
    Type B law of a Wigner matrix with infinitesimal law ``base_nu`` plus the
    deformation ``pert``: the numeric type B convolution

        (semicircle(sigma), base_nu) boxplus_B (delta_0, sum_j (delta_theta_j - delta_0))

    checked against the closed-form assembly on the grid. The returned nu is the
    closed form with the numeric ac density attached as its grid.
    """
    logging.info(f"Deformed type B law: sigma={sigma}, thetas={pert.all_thetas}, base={base_nu.kind}")
    base = TypeBDistribution(mu=semicircle(sigma), nu=base_nu)
    numeric = typeB_convolve(base, perturbation_typeB(pert), grid, threads)
    closed = deformed_nu_closed_form(sigma, base_nu, pert)

    x = grid.points
    numeric_ac, error = stieltjes_invert(_minus_atoms(numeric.nu.transform, closed.atoms), x,
                                         grid.eta_ladder, threads)
    mask = comparison_mask(x, sigma, closed.atoms)
    discrepancy = float(np.max(np.abs(numeric_ac[mask] - closed_form_density_on(closed, x[mask], sigma)),
                               initial=0.0))
    logging.info(f"Numeric vs closed-form type B density: max deviation {discrepancy:.3e}")
    if discrepancy > tolerance:
        raise NumericalSolverError(
            f"numeric type B density deviates from the closed form by {discrepancy:.3e} (> {tolerance})", sys)

    nu = SignedMeasure(atoms=closed.atoms, density=closed.density, support=closed.support,
                       kind=closed.kind, params=closed.params, ac_transform=closed.ac_transform,
                       grid=(x, numeric_ac), grid_error=error)
    return TypeBDistribution(mu=numeric.mu, nu=nu)
