#!/usr/bin/env python3
"""
Relaxation functions s(t, mu): solutions of s + mu (l * s) = 1

The Volterra equation is solved by product integration with s piecewise
linear in t.  The kernel moments of every cell are exact, taken from the
pair's (1*l) and (1*1*l); cells far from the diagonal fall back to Simpson's
rule where the exact differences would cancel.  All mu columns march
together because the weights do not depend on mu.
"""

import logging
from math import factorial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ExtrapolationError, SolverError, StencilError
from .kernels import FractionalPair, KernelPair
from .reports import ClaimReport
from .special_functions import mittag_leffler_neg
from .utils.artifacts import write_csv
from .utils.config import config
from .utils.grids import graded_grid, log_graded_grid
from .utils.progress import OperationType, ProgressTracker, parallel_map

logger = logging.getLogger(__name__)

SCHEME = "product-integration-linear"
ORACLE_SCHEME = "mittag-leffler"

# Cells with h/c below this ratio use Simpson's rule for their moments
_SIMPSON_RATIO = 1e-2

# Central difference weights (offsets -p..p) of second order for the j-th derivative
_CENTRAL_WEIGHTS = {
    0: np.array([1.0]),
    1: np.array([-0.5, 0.0, 0.5]),
    2: np.array([1.0, -2.0, 1.0]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    4: np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}


class RelaxationTable:
    """s(t_i, mu_j) sampled on a time grid and a symbol grid"""

    def __init__(self, pair: KernelPair, time_grid: np.ndarray, mu_grid: np.ndarray,
                 values: np.ndarray, scheme: str = SCHEME):
        self.pair = pair
        self.time_grid = np.asarray(time_grid, dtype=float)
        self.mu_grid = np.asarray(mu_grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.scheme = scheme
        for array in (self.time_grid, self.mu_grid, self.values):
            array.setflags(write=False)
        self._splines: Dict[int, CubicSpline] = {}

    @property
    def t_max(self) -> float:
        return float(self.time_grid[-1])

    def at(self, t: float) -> np.ndarray:
        """s(t, .) over mu_grid, interpolating linearly between solved rows"""
        if not 0 <= t <= self.t_max:
            raise ExtrapolationError(f"t={t:.6g} outside the solved range [0, {self.t_max:.6g}]",
                                     t, 0.0, self.t_max)
        index = int(np.searchsorted(self.time_grid, t))
        if index < self.time_grid.size and self.time_grid[index] == t:
            return self.values[index].copy()
        lower, upper = self.time_grid[index - 1], self.time_grid[index]
        weight = (t - lower) / (upper - lower)
        return (1.0 - weight) * self.values[index - 1] + weight * self.values[index]

    def column(self, mu: float) -> np.ndarray:
        """s(., mu) over the time grid for a solved mu"""
        matches = np.nonzero(self.mu_grid == mu)[0]
        if matches.size == 0:
            raise DomainError(f"mu={mu:g} is not a solved column")
        return self.values[:, matches[0]].copy()

    def _row_spline(self, index: int, row: np.ndarray) -> Optional[CubicSpline]:
        positive = self.mu_grid > 0
        if np.sum(positive) < 4 or np.any(row[positive] <= 0):
            return None
        spline = self._splines.get(index)
        if spline is None:
            spline = CubicSpline(np.log(self.mu_grid[positive]), np.log(row[positive]))
            self._splines[index] = spline
        return spline

    def symbol(self, t: float, mu: Any) -> np.ndarray:
        """s(t, mu) for arbitrary mu >= 0

        Inside the solved range the row is interpolated with a cubic spline in
        log-log coordinates.  Beyond the largest column s ~ c(t)/mu with c
        matched at that column; below the smallest positive column s is
        linear between s(t, 0) = 1 and the first column.
        """
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if np.any(mu < 0):
            raise DomainError("Symbol needs mu >= 0")
        row = self.at(t)
        index = int(np.searchsorted(self.time_grid, t))
        on_node = index < self.time_grid.size and self.time_grid[index] == t
        positive = self.mu_grid > 0
        mu_pos = self.mu_grid[positive]
        row_pos = row[positive]
        if mu_pos.size == 0:
            raise DomainError("Table has no positive symbol columns")

        out = np.empty_like(mu)
        low = mu < mu_pos[0]
        high = mu > mu_pos[-1]
        inside = ~(low | high)
        out[low] = 1.0 + (row_pos[0] - 1.0) * mu[low] / mu_pos[0]
        out[high] = row_pos[-1] * mu_pos[-1] / mu[high]
        spline = self._row_spline(index, row) if on_node else None
        if spline is not None:
            out[inside] = np.exp(spline(np.log(mu[inside])))
        else:
            out[inside] = np.interp(mu[inside], mu_pos, row_pos)
        return out

    def rows(self):
        """Yield (t, mu, s) in row-major order"""
        for i, t in enumerate(self.time_grid):
            for j, mu in enumerate(self.mu_grid):
                yield t, mu, self.values[i, j]

    def write_csv(self, path: str) -> str:
        """Export as `t,mu,s`"""
        return write_csv(path, ["t", "mu", "s"], self.rows())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'pair': self.pair.to_dict(),
            'scheme': self.scheme,
            'time_points': int(self.time_grid.size),
            't_max': self.t_max,
            'mu_grid': self.mu_grid,
        }


def time_grid_for(times: Sequence[float], points: Optional[int] = None,
                  depth: float = 1e-14) -> np.ndarray:
    """{0} plus a geometric mesh reaching max(times), with every sample time inserted"""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0):
        raise DomainError("Sample times must be positive")
    points = int(points or config.get_resolution("relaxation_points"))
    t_max = float(np.max(times))
    t_min = min(depth * t_max, float(np.min(times)))
    grid = log_graded_grid(t_min, t_max, points)
    return np.union1d(grid, times)


def product_weights(pair: KernelPair, grid: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Row weights omega_ij (j < i) and diagonal omega_ii of the product rule"""
    n = grid.size
    rows: List[np.ndarray] = [np.zeros(0)]
    diagonal = np.zeros(n)
    for i in range(1, n):
        # lags t_i - t_j for j = 0..i; cell j spans lags [c_j, d_j] = [lag_j, lag_{j-1}]
        lags = grid[i] - grid[:i + 1]
        L1 = pair.cumulative_l(lags)
        L2 = pair.double_cumulative_l(lags)
        c, d = lags[1:], lags[:-1]
        h = d - c
        weight_right = (L2[:-1] - L2[1:] - h * L1[1:]) / h
        weight_left = L1[:-1] - L1[1:] - weight_right

        far = np.zeros(i, dtype=bool)
        far[:-1] = h[:-1] < _SIMPSON_RATIO * c[:-1]
        if np.any(far):
            cf, df, hf = c[far], d[far], h[far]
            lc, lm, ld = pair.l(cf), pair.l(0.5 * (cf + df)), pair.l(df)
            weight_right[far] = hf / 6.0 * (lc + 2.0 * lm)
            weight_left[far] = hf / 6.0 * (2.0 * lm + ld)

        # cell j couples to s_{j-1} (left) and s_j (right)
        row = np.zeros(i + 1)
        row[:i] += weight_left
        row[1:] += weight_right
        diagonal[i] = row[i]
        rows.append(row[:i])
    return rows, diagonal


def has_negative_moments(rows: List[np.ndarray], diagonal: np.ndarray) -> bool:
    if np.any(diagonal[1:] <= 0):
        return True
    for row in rows:
        if row.size and np.min(row) < -1e-12 * np.max(np.abs(row)):
            return True
    return False


def _march(rows: List[np.ndarray], diagonal: np.ndarray, mu: np.ndarray) -> np.ndarray:
    n = diagonal.size
    values = np.empty((n, mu.size))
    values[0] = 1.0
    pivots = 1.0 + mu[None, :] * diagonal[:, None]
    if np.any(pivots[1:] <= 0):
        raise SolverError("Non-positive pivot 1 + mu*omega_ii in the relaxation solver")
    for i in range(1, n):
        values[i] = (1.0 - mu * (rows[i] @ values[:i])) / pivots[i]
    return values


def solve_table(pair: KernelPair, grid: Sequence[float], mu_grid: Sequence[float],
                threads: Optional[int] = None) -> RelaxationTable:
    """Solve s + mu (l * s) = 1 for every mu of mu_grid on one time grid

    Args:
        pair: Kernel pair
        grid: Strictly increasing times with grid[0] = 0
        mu_grid: Nonnegative symbol values
        threads: Worker threads over mu columns

    Returns:
        RelaxationTable with one column per mu
    """
    grid = np.asarray(grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("Relaxation grid must start at 0 and increase strictly")
    if mu_grid.ndim != 1 or mu_grid.size == 0 or np.any(mu_grid < 0) or not np.all(np.isfinite(mu_grid)):
        raise DomainError("Symbol grid must hold finite values mu >= 0")
    pair.check_range(grid[1:])

    rows, diagonal = product_weights(pair, grid)
    if has_negative_moments(rows, diagonal):
        raise DomainError(f"{pair.name}: negative kernel moments; l is not the resolvent of a PC pair")

    threads = threads or config.get_threads()
    chunks = [c for c in np.array_split(mu_grid, max(1, min(threads, mu_grid.size))) if c.size]
    with ProgressTracker(OperationType.RELAXATION, total=len(chunks),
                         desc=f"Relaxation {pair.name}", unit="blocks",
                         enabled=grid.size * mu_grid.size > 10 ** 6) as tracker:
        blocks = parallel_map(lambda mu: _march(rows, diagonal, mu), chunks, threads, tracker)
    values = np.concatenate(blocks, axis=1)

    if not np.all(np.isfinite(values)):
        raise SolverError(f"{pair.name}: relaxation solver produced non-finite values")
    logger.debug(f"Solved relaxation for {pair.name} on {grid.size} times x {mu_grid.size} symbols")
    return RelaxationTable(pair, grid, mu_grid, values)


def solve_relaxation(pair: KernelPair, mu: float, grid: Sequence[float]) -> np.ndarray:
    """s(t_i, mu) on a time grid starting at 0"""
    if not mu >= 0:
        raise DomainError(f"mu must be nonnegative, got {mu}")
    return solve_table(pair, grid, [mu], threads=1).values[:, 0].copy()


def mittag_leffler_oracle_check(alpha: float, mu: float = 1.0, t_max: float = 10.0,
                                points: Sequence[int] = (512, 1024, 2048),
                                tolerance: Optional[float] = None, order_ratio: float = 1.8) -> ClaimReport:
    """Solver error against E_alpha(-mu t^alpha) on graded grids of doubling size

    Passes when the finest grid is within `tolerance` and every doubling
    shrinks the maximum error by at least `order_ratio`.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"Oracle needs alpha in (0, 1), got {alpha}")
    tolerance = config.get_tolerance("oracle") if tolerance is None else tolerance
    points = sorted(int(n) for n in points)
    if len(points) < 2:
        raise DomainError("Convergence needs at least two grid sizes")
    pair = FractionalPair(alpha)
    errors = []
    for n in points:
        grid = graded_grid(t_max, n, config.get_resolution("grade"))
        values = solve_relaxation(pair, mu, grid)
        exact = mittag_leffler_neg(alpha, mu * grid ** alpha)
        errors.append(float(np.max(np.abs(values - exact))))
        logger.debug(f"Oracle error with {n} points: {errors[-1]:.3e}")
    ratios = [coarse / fine if fine > 0 else np.inf for coarse, fine in zip(errors, errors[1:])]
    passed = errors[-1] <= tolerance and all(ratio >= order_ratio for ratio in ratios)
    return ClaimReport("relaxation-oracle", passed,
                       {'alpha': alpha, 'mu': mu, 'points': points, 'errors': errors, 'ratios': ratios,
                        'max_error': errors[-1]},
                       target=order_ratio, tolerance=tolerance).log()


def relaxation_symbol(pair: KernelPair, t: float, mu_grid: Any,
                      table: Optional[RelaxationTable] = None) -> np.ndarray:
    """s(t, mu_j) over a symbol grid

    Pairs with a closed form (fractional, heat limit) are evaluated directly;
    other pairs read a supplied table or solve one column per mu on a grid
    ending at t.
    """
    mu = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    if np.any(mu < 0):
        raise DomainError("Symbol needs mu >= 0")
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0:
        return np.ones_like(mu)
    closed = pair.relaxation(t, mu)
    if closed is not None:
        return closed
    if table is not None:
        return table.symbol(t, mu)
    unique, inverse = np.unique(mu, return_inverse=True)
    solved = solve_table(pair, time_grid_for([t]), unique)
    return solved.at(t)[inverse]


class RelaxationSymbol:
    """Evaluator of s(t, mu) at fixed sample times over any mu

    General pairs are solved once on a geometric mu grid covering
    [mu_min, mu_max] with every sample time on the time grid.
    """

    def __init__(self, pair: KernelPair, times: Sequence[float],
                 mu_min: float = 1e-10, mu_max: float = 1e10,
                 per_decade: Optional[int] = None, points: Optional[int] = None,
                 threads: Optional[int] = None):
        self.pair = pair
        self.times = np.asarray(times, dtype=float)
        self.table: Optional[RelaxationTable] = None
        if pair.relaxation(1.0, np.ones(1)) is not None:
            return
        per_decade = int(per_decade or config.get_resolution("mu_points_per_decade"))
        count = int(np.ceil(np.log10(mu_max / mu_min) * per_decade)) + 1
        mu_grid = np.concatenate(([0.0], np.geomspace(mu_min, mu_max, count)))
        self.table = solve_table(pair, time_grid_for(self.times, points), mu_grid, threads)

    def __call__(self, t: float, mu: Any) -> np.ndarray:
        return relaxation_symbol(self.pair, t, mu, self.table)


def symbol_for(pair: KernelPair, times: Sequence[float],
               symbol: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
               ) -> Callable[[float, np.ndarray], np.ndarray]:
    """The supplied evaluator (t, mu) -> s(t, mu), or a RelaxationSymbol solved for times"""
    if symbol is not None:
        return symbol
    return RelaxationSymbol(pair, times)


def verify_smu_bounds(table: RelaxationTable,
                      psi: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                      t_min: float = 0.0,
                      t_max: Optional[float] = None,
                      tolerance: Optional[float] = None) -> ClaimReport:
    """Check 1/(1 + mu/k(t)) <= s(t, mu) <= 1/(1 + mu (1*l)(t))

    With psi given, the upper bound becomes C/(1 + mu psi(t)) and the
    smallest admissible C is reported instead of being fixed to one.
    """
    tolerance = config.get_tolerance("smu_bounds") if tolerance is None else tolerance
    t_max = table.t_max if t_max is None else t_max
    mask = (table.time_grid > 0) & (table.time_grid >= t_min) & (table.time_grid <= t_max)
    t = table.time_grid[mask]
    if t.size == 0:
        raise DomainError("No solved times inside the requested window")
    s = table.values[mask]
    mu = table.mu_grid[None, :]

    k = table.pair.k(t)[:, None]
    if table.pair.k_atom > 0:
        lower = np.zeros_like(s)
    else:
        with np.errstate(divide="ignore"):
            lower = np.where(k > 0, k / (k + mu), 0.0)

    constant = None
    if psi is None:
        upper = 1.0 / (1.0 + mu * table.pair.cumulative_l(t)[:, None])
    else:
        rate = np.asarray(psi(t), dtype=float)[:, None]
        constant = float(np.max(s * (1.0 + mu * rate)))
        upper = constant / (1.0 + mu * rate)

    lower_violation = np.where(lower > 0, (lower - s) / np.where(lower > 0, lower, 1.0), 0.0)
    upper_violation = (s - upper) / upper
    worst_lower = float(np.max(lower_violation))
    worst_upper = float(np.max(upper_violation))
    count = int(np.sum(lower_violation > tolerance) + np.sum(upper_violation > tolerance))
    in_range = bool(np.all(s > 0) and np.all(s <= 1.0 + tolerance))

    measured = {
        'pair': table.pair.name,
        'worst_lower_violation': max(worst_lower, 0.0),
        'worst_upper_violation': max(worst_upper, 0.0),
        'violations': count,
        'points': int(s.size),
        'values_in_unit_interval': in_range,
    }
    if constant is not None:
        measured['fitted_constant'] = constant
    return ClaimReport("smu-bounds", count == 0 and in_range, measured, tolerance=tolerance).log()


def upper_constant_stability(pair: KernelPair, psi: Callable[[np.ndarray], np.ndarray],
                             t_lo: float, t_hi: float, mu_grid: Sequence[float],
                             points: Sequence[int] = (1024, 2048),
                             tolerance: float = 0.05) -> ClaimReport:
    """Fitted C of s <= C/(1 + mu psi(t)) under grid refinement"""
    constants = []
    for n in points:
        table = solve_table(pair, time_grid_for([t_lo, t_hi], n), mu_grid)
        report = verify_smu_bounds(table, psi=psi, t_min=t_lo, t_max=t_hi)
        constants.append(report.measured['fitted_constant'])
    change = abs(constants[-1] - constants[0]) / constants[-1]
    return ClaimReport("upper-constant-stability", change <= tolerance and np.all(np.isfinite(constants)),
                       {'constants': constants, 'points': list(points), 'relative_change': change},
                       tolerance=tolerance).log()


def complete_monotonicity_check(pair: KernelPair, t: float, mu_grid: Sequence[float],
                                max_order: int, tolerance: Optional[float] = None) -> ClaimReport:
    """Divided differences of mu -> s(t, mu) of order j carry the sign (-1)^j

    Args:
        pair: Kernel pair
        t: Time
        mu_grid: Strictly increasing positive symbol values, at least max_order+1
        max_order: Highest order J (at most 6)
        tolerance: Relative slack per order (scaled by the largest difference)
    """
    mu = np.asarray(mu_grid, dtype=float)
    if not 0 <= max_order <= 6:
        raise DomainError(f"Order must lie in [0, 6], got {max_order}")
    if mu.size < max_order + 1 or np.any(mu <= 0) or np.any(np.diff(mu) <= 0):
        raise DomainError("Need at least J+1 strictly increasing positive mu values")
    tolerance = config.get_tolerance("monotonicity") if tolerance is None else tolerance

    differences = relaxation_symbol(pair, t, mu)
    violations = []
    minima = []
    for order in range(max_order + 1):
        if order > 0:
            differences = (differences[1:] - differences[:-1]) / (mu[order:] - mu[:-order])
        signed = (-1) ** order * differences
        scale = float(np.max(np.abs(differences))) if differences.size else 0.0
        bad = np.nonzero(signed < -tolerance * scale)[0]
        for index in bad:
            violations.append({'order': order, 'index': int(index), 'value': float(differences[index])})
        minima.append(float(np.min(signed)) if signed.size else 0.0)

    return ClaimReport("complete-monotonicity", not violations,
                       {'pair': pair.name, 't': t, 'max_order': max_order, 'signed_minima': minima},
                       tolerance=tolerance, details={'violations': violations}).log()


def _stencil(mu: float, order: int, step: float) -> Tuple[np.ndarray, np.ndarray, float]:
    weights = _CENTRAL_WEIGHTS[order]
    half = (weights.size - 1) // 2
    delta = mu * step
    return weights, mu + delta * np.arange(-half, half + 1), delta


def mu_derivative(pair: KernelPair, t: float, mu: float, order: int,
                  step: float = 0.05,
                  symbol: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> Tuple[float, float]:
    """Richardson-extrapolated central difference of d^j s / dmu^j

    Args:
        pair: Kernel pair
        t: Time
        mu: Positive symbol value
        order: Derivative order j in [0, 4]
        step: Relative stencil spacing of the coarse difference
        symbol: Optional evaluator mu -> s(t, mu); defaults to relaxation_symbol

    Returns:
        Tuple of (derivative estimate, error bound)

    Raises:
        StencilError: the stencil leaves (mu/2, 2 mu)
    """
    if order not in _CENTRAL_WEIGHTS:
        raise DomainError(f"Derivative order must lie in [0, 4], got {order}")
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    half = (_CENTRAL_WEIGHTS[order].size - 1) // 2
    if not (mu * (1.0 - half * step) > 0.5 * mu and mu * (1.0 + half * step) < 2.0 * mu):
        raise StencilError(f"Stencil of order {order} with step {step} leaves (mu/2, 2mu)")
    if symbol is None:
        symbol = lambda nodes: relaxation_symbol(pair, t, nodes)
    if order == 0:
        return float(symbol(np.array([mu]))[0]), 0.0

    estimates = []
    rounding = 0.0
    for h in (step, 0.5 * step):
        weights, nodes, delta = _stencil(mu, order, h)
        values = symbol(nodes)
        estimates.append(float(weights @ values) / delta ** order)
        rounding += 1e-13 * float(np.abs(weights) @ np.abs(values)) / delta ** order
    coarse, fine = estimates
    extrapolated = (4.0 * fine - coarse) / 3.0
    return extrapolated, abs(extrapolated - fine) + rounding


def taylor_derivative_bound_check(pair: KernelPair, t: float, mu: float, order: int,
                                  step: float = 0.05) -> ClaimReport:
    """Check mu^j |d^j s/dmu^j (t, mu)| <= 2^j j! s(t, mu/2)

    The finite-difference error bound is added to the right-hand side.
    """
    if order not in _CENTRAL_WEIGHTS:
        raise DomainError(f"Derivative order must lie in [0, 4], got {order}")
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    nodes = [np.array([0.5 * mu, mu])]
    if order:
        nodes += [_stencil(mu, order, h)[1] for h in (step, 0.5 * step)]
    nodes = np.unique(np.concatenate(nodes))
    cache = dict(zip(nodes.tolist(), relaxation_symbol(pair, t, nodes).tolist()))

    def symbol(points: np.ndarray) -> np.ndarray:
        return np.array([cache[p] for p in points.tolist()])

    derivative, error = mu_derivative(pair, t, mu, order, step, symbol)
    half_value = cache[0.5 * mu]
    lhs = mu ** order * abs(derivative)
    bound = 2 ** order * factorial(order) * half_value
    slack = mu ** order * error
    if order and error > 0.1 * abs(derivative):
        logger.warning(f"Finite-difference error bound {error:.3g} is large relative to the derivative")
    return ClaimReport("taylor-derivative-bound", lhs <= bound + slack,
                       {'pair': pair.name, 't': t, 'mu': mu, 'order': order, 'derivative': derivative,
                        'fd_error': error, 'lhs': lhs, 'bound': bound}).log()


def _theta_power(log_mu_step: np.ndarray, values: np.ndarray, times: int) -> np.ndarray:
    out = values
    for _ in range(times):
        out = np.gradient(out, log_mu_step)
    return out


def multiplier_derivatives(values: np.ndarray, mu: np.ndarray, kappa: float, order: int) -> np.ndarray:
    """mu^n psi^(n)(mu) for psi(mu) = mu^kappa s(mu), sampled on a geometric mu grid

    Uses mu^n d^n/dmu^n = theta (theta - 1) ... (theta - n + 1) with theta = mu d/dmu,
    and theta = d/dlog(mu) on the log grid.
    """
    log_mu = np.log(mu)
    psi = mu ** kappa * values
    result = np.zeros_like(psi)
    # coefficients of theta(theta-1)...(theta-n+1) as a polynomial in theta
    polynomial = np.array([1.0])
    for m in range(order):
        polynomial = np.convolve(polynomial, np.array([1.0, -float(m)]))
    degree = polynomial.size - 1
    for power, coefficient in enumerate(polynomial):
        if coefficient:
            result = result + coefficient * _theta_power(log_mu, psi, degree - power)
    return result


def multiplier_bound_check(pair: KernelPair, times: Sequence[float], kappa: float, order: int,
                           mu_grid: Sequence[float], uniform: bool = True, tolerance: Optional[float] = None,
                           threads: Optional[int] = None) -> ClaimReport:
    """sup_mu mu^n |psi_kappa^(n)(mu)| (1*l)(t)^kappa across a t-sweep

    Args:
        pair: Kernel pair
        times: Sample times of the sweep
        kappa: Exponent in (0, 1]
        order: Derivative order n in [0, 3]
        mu_grid: Geometric positive symbol grid
        uniform: Require (max - min)/max of the sups within tolerance;
            otherwise only finite sups are required
        tolerance: Allowed spread (multiplier_spread by default)
    """
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")
    if not 0 <= order <= 3:
        raise DomainError(f"Order must lie in [0, 3], got {order}")
    mu = np.asarray(mu_grid, dtype=float)
    if mu.size < 5 or np.any(mu <= 0) or np.any(np.diff(mu) <= 0):
        raise DomainError("Multiplier check needs at least five increasing positive mu values")
    ratios = mu[1:] / mu[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise StencilError("Multiplier check needs a geometric mu grid")
    if uniform and tolerance is None:
        tolerance = config.get_tolerance("multiplier_spread")

    times = np.asarray(times, dtype=float)
    table = None
    if pair.relaxation(1.0, np.ones(1)) is None:
        table = solve_table(pair, time_grid_for(times), mu, threads)

    sups = []
    for t in times:
        values = table.at(float(t)) if table is not None else relaxation_symbol(pair, float(t), mu)
        derivative = multiplier_derivatives(values, mu, kappa, order)
        # one-sided differences at the ends are first order; skip them
        interior = derivative[order:mu.size - order] if order else derivative
        scale = float(pair.cumulative_l(np.array([t]))[0]) ** kappa
        sups.append(float(np.max(np.abs(interior))) * scale)

    sups_array = np.array(sups)
    finite = bool(np.all(np.isfinite(sups_array)))
    spread = 0.0
    if finite and sups_array.max() > 0:
        spread = float((sups_array.max() - sups_array.min()) / sups_array.max())
    passed = finite and (not uniform or spread <= tolerance)
    return ClaimReport("multiplier-bound", passed,
                       {'pair': pair.name, 'kappa': kappa, 'order': order, 'times': times,
                        'sups': sups, 'spread': spread},
                       tolerance=tolerance if uniform else None).log()
