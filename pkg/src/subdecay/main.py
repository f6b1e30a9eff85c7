#!/usr/bin/env python3
"""
Experiment runner for subdecay

An experiment is a JSON configuration naming a kind (bounds-suite,
relaxation, fundsol, decay-sweep or energy), the claims to check and their
parameters.  The runner dispatches every claim to the numerical modules and
writes three artifacts into the output directory:

  series.csv   long-format samples `series,t,value` (series is an index)
  fit.json     label, length and power-law fit of every series
  report.json  verdict, target, measured values and tolerance per claim

Artifacts carry no timestamps, so re-running a configuration reproduces
them byte for byte.
"""

import os
import json
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .decay import decay_sweep, large_time_profile, log_band_check, lower_bound_ratio
from .energy import (
    comparison_dominance_check, energy_decay_check, exponential_kernel, fundamental_identity_residual,
    l2_norm_inequality_check, mu_monotonicity_check, random_smooth_field,
)
from .errors import ConfigError, MissingArtifactError, SubdecayError
from .field import datum_from_dict
from .fundsol import (
    kochubei_bound_check, mass_check, msd_check, z_divergence_check, z_norm_decay_check, z_radial_hankel,
)
from .kernels import FractionalPair, KernelPair, KernelPairFactory, verify_pair
from .relaxation import (
    complete_monotonicity_check, mittag_leffler_oracle_check, multiplier_bound_check, solve_table,
    taylor_derivative_bound_check, time_grid_for, verify_smu_bounds,
)
from .reports import ClaimReport
from .special_functions import mittag_leffler_envelope_check
from .utils.artifacts import read_csv, read_json, write_csv, write_gnuplot, write_json
from .utils.config import DEFAULT_TOLERANCES, config
from .utils.grids import log_spaced

# Configure logging
log_dir = os.path.expanduser("~/.local/share/subdecay")
handlers: List[logging.Handler] = [logging.StreamHandler()]
try:
    os.makedirs(log_dir, exist_ok=True)
    handlers.append(logging.FileHandler(os.path.join(log_dir, "subdecay.log")))
except OSError:
    pass

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=handlers
)

logger = logging.getLogger(__name__)

PRESETS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")

SERIES_FILE = "series.csv"
FIT_FILE = "fit.json"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.txt"
PLOTS_DIR = "plots"

# Claims each kind can run, in execution order; a config without "claims" runs them all
KIND_CLAIMS = {
    'bounds-suite': ['ml-envelope', 'smu-bounds', 'complete-monotonicity', 'taylor-derivative', 'multiplier'],
    'relaxation': ['oracle', 'certificate', 'smu-bounds'],
    'fundsol': ['mass', 'msd', 'lp-decay', 'weak-decay', 'gradient-decay', 'divergence', 'kochubei'],
    'decay-sweep': ['decay', 'gradient-decay', 'lower-bound', 'log-band', 'large-time-profile'],
    'energy': ['power-bounds', 'fundamental-identity', 'l2-inequality', 'dominance', 'mu-monotone'],
}

DEFAULT_TIMES = {
    'bounds-suite': (1e-2, 1e4, 7),
    'relaxation': (1e-2, 10.0, 9),
    'fundsol': (1.0, 1e4, 9),
    'decay-sweep': (1e2, 1e6, 21),
    'energy': (0.1, 1e3, 9),
}

NUMBER = (int, float)

# Accepted fields and their JSON types
FIELDS = {
    'name': (str,),
    'description': (str,),
    'kind': (str,),
    'label': (str,),
    'claims': (list,),
    'pair': (dict, list),
    'alpha': NUMBER,
    'alphas': (list,),
    'dimensions': (list,),
    'r': NUMBER,
    'p': NUMBER + (list,),
    'times': (dict,),
    'window': (list,),
    'datum': (dict,),
    'psi': (dict,),
    'mu': NUMBER,
    'mus': (list,),
    't': NUMBER,
    't_max': NUMBER,
    'radii': (list,),
    'points': (int,),
    'oracle_points': (list,),
    'order_ratio': NUMBER,
    'seeds': (int,),
    'tolerances': (dict,),
    'output_dir': (str,),
    'threads': (int,),
    'cases': (list,),
}

ENVELOPE_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
ENVELOPE_POINTS = 10000
MONOTONICITY_MU = 0.125 * 2.0 ** np.arange(10)
# Report details that hold a series sampled at details["times"]
SERIES_KEYS = ("values", "scaled", "ratio", "norms")
MULTIPLIER_TIMES = (1.0, 10.0, 100.0)
MULTIPLIER_MU = np.geomspace(1e-4, 1e6, 321)
KOCHUBEI_RADII = np.geomspace(0.05, 30.0, 12)


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    """1-based line of the first occurrence of a JSON key in the raw text"""
    if not text:
        return None
    needle = json.dumps(key)
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _is_number(value: Any) -> bool:
    return isinstance(value, NUMBER) and not isinstance(value, bool)


def _number_list(data: Dict[str, Any], key: str, minimum: float = -np.inf, strict: bool = False,
                 integer: bool = False) -> Optional[List[float]]:
    if key not in data:
        return None
    value = data[key]
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"'{key}' must not be empty", field=key)
    for item in values:
        if not _is_number(item) or (integer and not isinstance(item, int)):
            raise ConfigError(f"'{key}' must hold {'integers' if integer else 'numbers'}, got {item!r}",
                              field=key)
        if item < minimum or (strict and item == minimum):
            relation = ">" if strict else ">="
            raise ConfigError(f"'{key}' values must be {relation} {minimum:g}, got {item}", field=key)
    return [int(v) if integer else float(v) for v in values]


class ExperimentConfig:
    """A validated experiment, or one case of it

    A config with a "cases" list expands into one child per case, each
    case's fields overriding the base fields.
    """

    def __init__(self, data: Dict[str, Any], source: str = "<config>", text: Optional[str] = None):
        self.source = source
        self.text = text
        try:
            self._validate(data)
        except ConfigError as e:
            if e.line is None and e.field:
                e.line = _line_of(text, e.field.split('.')[-1])
            raise
        self.data = data
        self.cases = [self] if not data.get('cases') else [
            ExperimentConfig(self._merge(case, index), source, text)
            for index, case in enumerate(data['cases'])
        ]

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> 'ExperimentConfig':
        """Parse and validate configuration text

        Raises:
            ConfigError: empty text, invalid JSON or a schema violation
        """
        if not text.strip():
            raise ConfigError(f"Empty configuration in {source}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {source}: {e.msg}", line=e.lineno)
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration in {source} must be a JSON object", line=1)
        return cls(data, source, text)

    @classmethod
    def from_file(cls, path: str) -> 'ExperimentConfig':
        """Load a configuration file"""
        try:
            with open(path, 'r') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"Cannot read {path}: {e}")
        return cls.from_text(text, path)

    def _merge(self, case: Any, index: int) -> Dict[str, Any]:
        if not isinstance(case, dict):
            raise ConfigError(f"Case {index} must be an object", field="cases")
        for key in ('kind', 'name', 'cases'):
            if key in case:
                raise ConfigError(f"Case {index} cannot override '{key}'", field=key)
        merged = {k: v for k, v in self.data.items() if k != 'cases'}
        tolerances = dict(merged.get('tolerances', {}))
        tolerances.update(case.get('tolerances', {}))
        merged.update(case)
        if tolerances:
            merged['tolerances'] = tolerances
        merged.setdefault('label', f"case {index}")
        return merged

    def _validate(self, data: Dict[str, Any]) -> None:
        for key, value in data.items():
            if key not in FIELDS:
                raise ConfigError(f"Unknown field '{key}'", field=key)
            if not isinstance(value, FIELDS[key]) or (isinstance(value, bool) and FIELDS[key] != (bool,)):
                raise ConfigError(f"Field '{key}' has the wrong type ({type(value).__name__})", field=key)

        if 'kind' not in data:
            raise ConfigError("Missing required field 'kind'", field="kind")
        self.kind = data['kind']
        if self.kind not in KIND_CLAIMS:
            raise ConfigError(f"Unknown kind {self.kind!r} (known: {', '.join(KIND_CLAIMS)})", field="kind")
        self.name = data.get('name', os.path.splitext(os.path.basename(self.source))[0])
        self.description = data.get('description', "")
        self.label = data.get('label', "")

        known = KIND_CLAIMS[self.kind]
        self.claims = data.get('claims', known)
        unknown = [c for c in self.claims if c not in known]
        if not self.claims or unknown:
            raise ConfigError(f"Claims {unknown or '[]'} are not available for kind {self.kind} "
                              f"(available: {', '.join(known)})", field="claims")

        self.pairs = self._pairs(data)
        first = self.pairs[0] if self.pairs else None
        if 'alpha' in data:
            self.alpha = float(data['alpha'])
        else:
            self.alpha = first.alpha if isinstance(first, FractionalPair) else 0.5
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}", field="alpha")
        self.alphas = _number_list(data, 'alphas', 0.0, strict=True) or list(ENVELOPE_ALPHAS)
        self.dimensions = _number_list(data, 'dimensions', 1, integer=True) or [1]
        self.r = float(data.get('r', 2.0))
        if not self.r > 1:
            raise ConfigError(f"r must exceed 1, got {self.r}", field="r")
        self.p = _number_list(data, 'p', 1.0) or [2.0]

        self.times = self._times(data.get('times', {}))
        self.window = None
        if 'window' in data:
            window = _number_list(data, 'window', 0.0, strict=True)
            if len(window) != 2 or not window[0] < window[1]:
                raise ConfigError("window must be [t_lo, t_hi] with t_lo < t_hi", field="window")
            self.window = (window[0], window[1])

        self.datum = data.get('datum')
        for d in self.dimensions:
            datum_from_dict(self.datum, d)
        self.psi = self._psi(data.get('psi'))

        self.mu = float(data.get('mu', 1.0))
        if not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}", field="mu")
        self.mus = _number_list(data, 'mus', 0.0)
        self.t = float(data.get('t', 1.0))
        self.t_max = float(data.get('t_max', 1e8))
        if not self.t > 0 or not self.t_max > 0:
            raise ConfigError("t and t_max must be positive", field="t" if not self.t > 0 else "t_max")
        self.radii = _number_list(data, 'radii', 0.0, strict=True)
        self.points = data.get('points')
        if self.points is not None and self.points < 16:
            raise ConfigError(f"points must be at least 16, got {self.points}", field="points")
        self.oracle_points = _number_list(data, 'oracle_points', 16, integer=True) or [512, 1024, 2048]
        self.order_ratio = float(data.get('order_ratio', 1.8))
        self.seeds = data.get('seeds', 100)
        self.threads = data.get('threads')
        if self.seeds < 1 or (self.threads is not None and self.threads < 1):
            raise ConfigError("seeds and threads must be positive", field="seeds" if self.seeds < 1 else "threads")
        self.output_dir = data.get('output_dir')

        self.tolerances = data.get('tolerances', {})
        for name, value in self.tolerances.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"Unknown tolerance '{name}'", field=f"tolerances.{name}")
            if not _is_number(value) or not value > 0:
                raise ConfigError(f"Tolerance '{name}' must be a positive number", field=f"tolerances.{name}")

    def _pairs(self, data: Dict[str, Any]) -> List[KernelPair]:
        spec = data.get('pair')
        if spec is None:
            return []
        specs = spec if isinstance(spec, list) else [spec]
        return [KernelPairFactory.create(s) for s in specs]

    def _times(self, spec: Dict[str, Any]) -> np.ndarray:
        unknown = [k for k in spec if k not in ('t_lo', 't_hi', 'count')]
        if unknown:
            raise ConfigError(f"Unknown field '{unknown[0]}' in times", field=f"times.{unknown[0]}")
        t_lo, t_hi, count = DEFAULT_TIMES[self.kind]
        t_lo, t_hi, count = spec.get('t_lo', t_lo), spec.get('t_hi', t_hi), spec.get('count', count)
        if not (_is_number(t_lo) and _is_number(t_hi) and 0 < t_lo < t_hi):
            raise ConfigError("times needs 0 < t_lo < t_hi", field="times.t_lo")
        if not isinstance(count, int) or isinstance(count, bool) or count < 2:
            raise ConfigError("times.count must be an integer >= 2", field="times.count")
        return log_spaced(float(t_lo), float(t_hi), count)

    def _psi(self, spec: Optional[Dict[str, Any]]) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        if spec is None:
            return None
        if set(spec) != {'power'} or not _is_number(spec['power']) or not spec['power'] > 0:
            raise ConfigError("psi must be {\"power\": x} with x > 0", field="psi")
        power = float(spec['power'])
        return lambda t: np.power(np.asarray(t, dtype=float), power)

    @property
    def t_lo(self) -> float:
        return float(self.times[0])

    @property
    def t_hi(self) -> float:
        return float(self.times[-1])

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.data)


def list_presets() -> List[Tuple[str, str]]:
    """Names and descriptions of the packaged presets"""
    presets = []
    if not os.path.isdir(PRESETS_DIR):
        return presets
    for filename in sorted(os.listdir(PRESETS_DIR)):
        if not filename.endswith(".json"):
            continue
        path = os.path.join(PRESETS_DIR, filename)
        try:
            description = read_json(path).get('description', "")
        except (OSError, ValueError, AttributeError) as e:
            logger.warning(f"Skipping unreadable preset {filename}: {e}")
            continue
        presets.append((filename[:-len(".json")], description))
    return presets


def preset_path(name: str) -> Optional[str]:
    path = os.path.join(PRESETS_DIR, f"{name}.json")
    return path if os.path.isfile(path) else None


def load_config(source: str) -> ExperimentConfig:
    """Load a config file, or a packaged preset when no such file exists"""
    if os.path.isfile(source):
        return ExperimentConfig.from_file(source)
    path = preset_path(source)
    if path is None:
        raise ConfigError(f"No config file or preset named {source!r}")
    return ExperimentConfig.from_file(path)


class RunResult:
    """Claim reports and series collected during a run"""

    def __init__(self, name: str, kind: str):
        self.name = name
        self.kind = kind
        self.reports: List[Tuple[str, ClaimReport]] = []
        self.series: List[Tuple[str, np.ndarray, np.ndarray, Any]] = []

    @property
    def passed(self) -> bool:
        return all(report.passed for _, report in self.reports)

    def add_report(self, context: str, report: ClaimReport) -> ClaimReport:
        self.reports.append((context, report))
        details = report.details
        key = next((k for k in SERIES_KEYS if k in details), None)
        if 'times' in details and key is not None:
            self.add_series(f"{context} {report.claim}", details['times'], details[key],
                            report.measured.get('fit'))
        return report

    def add_series(self, label: str, times: Sequence[float], values: Sequence[float],
                   fit: Any = None) -> None:
        self.series.append((label, np.asarray(times, dtype=float), np.asarray(values, dtype=float), fit))

    def report_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'kind': self.kind,
            'version': __version__,
            'passed': self.passed,
            'claims': [dict({'context': context}, **report.to_dict()) for context, report in self.reports],
        }

    def fit_dict(self) -> Dict[str, Any]:
        return {
            'series': [
                {'index': index, 'label': label, 'points': int(times.size), 'fit': fit}
                for index, (label, times, _, fit) in enumerate(self.series)
            ]
        }

    def series_rows(self):
        for index, (_, times, values, _) in enumerate(self.series):
            for t, value in zip(times, values):
                yield index, t, value

    def write(self, directory: str) -> List[str]:
        """Write series.csv, fit.json and report.json"""
        return [
            write_csv(os.path.join(directory, SERIES_FILE), ["series", "t", "value"], self.series_rows()),
            write_json(os.path.join(directory, FIT_FILE), self.fit_dict()),
            write_json(os.path.join(directory, REPORT_FILE), self.report_dict()),
        ]


def _context(case: ExperimentConfig, *parts: Any) -> str:
    text = " ".join(str(p) for p in parts if p != "")
    return f"{case.label}: {text}" if case.label else text


class ExperimentRunner:
    """Run every claim of an experiment and write its artifacts"""

    def __init__(self, experiment: ExperimentConfig, output_dir: Optional[str] = None,
                 threads: Optional[int] = None, tolerance_scale: Optional[float] = None):
        self.experiment = experiment
        self.output_dir = (output_dir or experiment.output_dir
                           or os.path.join(config.get_output_dir(), experiment.name))
        self.threads = threads or experiment.threads or config.get_threads()
        self.tolerance_scale = tolerance_scale
        self.handlers = {
            'bounds-suite': self._bounds_suite,
            'relaxation': self._relaxation,
            'fundsol': self._fundsol,
            'decay-sweep': self._decay_sweep,
            'energy': self._energy,
        }

    def _prepare_output(self) -> None:
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create output directory {self.output_dir}: {e}", field="output_dir")
        if not os.access(self.output_dir, os.W_OK):
            raise ConfigError(f"Output directory {self.output_dir} is not writable", field="output_dir")

    def run(self) -> RunResult:
        """Run the experiment

        Returns:
            RunResult with every claim report; artifacts are written to the
            output directory

        Raises:
            ConfigError: the output directory is not writable
            SubdecayError: a module could not produce an answer
        """
        self._prepare_output()
        experiment = self.experiment
        result = RunResult(experiment.name, experiment.kind)
        logger.info(f"Running {experiment.name} ({experiment.kind}, {len(experiment.cases)} case(s)) "
                    f"into {self.output_dir}")

        with config.tolerance_overrides(scale=self.tolerance_scale):
            for case in experiment.cases:
                with config.tolerance_overrides(case.tolerances):
                    try:
                        self.handlers[case.kind](case, result)
                    except SubdecayError as e:
                        logger.error(f"{experiment.name} {case.label or case.kind} failed: {e}")
                        raise

        result.write(self.output_dir)
        failed = sum(1 for _, report in result.reports if not report.passed)
        logger.info(f"Finished {experiment.name}: {len(result.reports) - failed} passed, {failed} failed")
        return result

    def _pairs(self, case: ExperimentConfig) -> List[KernelPair]:
        return case.pairs or [FractionalPair(case.alpha if case.alpha < 1 else 0.5)]

    def _bounds_suite(self, case: ExperimentConfig, result: RunResult) -> None:
        claims = case.claims
        if 'ml-envelope' in claims:
            x = np.geomspace(1e-6, 1e6, ENVELOPE_POINTS)
            result.add_report(_context(case, "E_alpha"), mittag_leffler_envelope_check(case.alphas, x))
        if 'smu-bounds' in claims:
            mus = case.mus or [1e-2, 1.0, 1e2]
            for pair in case.pairs or KernelPairFactory.create_builtin():
                table = solve_table(pair, time_grid_for([case.t_lo, case.t_hi], case.points), mus, self.threads)
                result.add_report(_context(case, pair.name),
                                  verify_smu_bounds(table, t_min=case.t_lo, t_max=case.t_hi))
        for pair in self._pairs(case):
            if 'complete-monotonicity' in claims:
                result.add_report(_context(case, pair.name, f"t={case.t:g}"),
                                  complete_monotonicity_check(pair, case.t, MONOTONICITY_MU, 4))
            if 'taylor-derivative' in claims:
                mu = case.mu if 'mu' in case.data else 3.0
                for order in range(5):
                    result.add_report(_context(case, pair.name, f"j={order}"),
                                      taylor_derivative_bound_check(pair, case.t, mu, order))
            if 'multiplier' in claims:
                result.add_report(_context(case, pair.name),
                                  multiplier_bound_check(pair, MULTIPLIER_TIMES, 0.5, 2, MULTIPLIER_MU,
                                                         threads=self.threads))

    def _relaxation(self, case: ExperimentConfig, result: RunResult) -> None:
        if 'oracle' in case.claims:
            result.add_report(_context(case, f"alpha={case.alpha:g} mu={case.mu:g}"),
                              mittag_leffler_oracle_check(case.alpha, case.mu, case.t_hi, case.oracle_points,
                                                          order_ratio=case.order_ratio))
        for pair in self._pairs(case):
            if 'certificate' in case.claims:
                certificate = verify_pair(pair, case.times, threads=self.threads)
                result.add_report(_context(case, pair.name),
                                  ClaimReport("pc-certificate", certificate.passed, certificate.to_dict(),
                                              tolerance=certificate.tolerance).log())
            if 'smu-bounds' in case.claims:
                mus = case.mus or [1e-2, 1.0, 1e2]
                table = solve_table(pair, time_grid_for([case.t_lo, case.t_hi], case.points), mus, self.threads)
                result.add_report(_context(case, pair.name),
                                  verify_smu_bounds(table, psi=case.psi, t_min=case.t_lo, t_max=case.t_hi))

    def _fundsol(self, case: ExperimentConfig, result: RunResult) -> None:
        claims = case.claims
        for pair in self._pairs(case):
            for d in case.dimensions:
                where = _context(case, pair.name, f"d={d}")
                if 'mass' in claims or 'msd' in claims:
                    for t in case.times:
                        profile = z_radial_hankel(pair, float(t), d)
                        if 'mass' in claims:
                            result.add_report(f"{where} t={t:g}", mass_check(profile))
                        if 'msd' in claims:
                            result.add_report(f"{where} t={t:g}", msd_check(pair, float(t), d, profile))
                for p in case.p:
                    if 'lp-decay' in claims:
                        result.add_report(f"{where} p={p:g}",
                                          z_norm_decay_check(pair, case.times, d, p, window=case.window,
                                                             threads=self.threads))
                    if 'gradient-decay' in claims:
                        result.add_report(f"{where} p={p:g}",
                                          z_norm_decay_check(pair, case.times, d, p, gradient=True,
                                                             window=case.window, threads=self.threads))
                    if 'divergence' in claims:
                        result.add_report(f"{where} p={p:g}", z_divergence_check(pair, case.t, d, p))
                if 'weak-decay' in claims and d >= 3:
                    result.add_report(where, z_norm_decay_check(pair, case.times, d, d / (d - 2.0), weak=True,
                                                                window=case.window, threads=self.threads))
                if 'kochubei' in claims:
                    alpha = pair.alpha if isinstance(pair, FractionalPair) else case.alpha
                    radii = case.radii or KOCHUBEI_RADII
                    result.add_report(where, kochubei_bound_check(case.times, radii, alpha, d))

    def _decay_sweep(self, case: ExperimentConfig, result: RunResult) -> None:
        claims = case.claims
        for pair in self._pairs(case):
            for d in case.dimensions:
                where = _context(case, pair.name, f"d={d}")
                datum = datum_from_dict(case.datum, d)
                for gradient, claim in ((False, 'decay'), (True, 'gradient-decay')):
                    if claim not in claims:
                        continue
                    sweep = decay_sweep(pair, d, case.r, case.times, datum, gradient=gradient, psi=case.psi,
                                        window=case.window, threads=self.threads, points=case.points)
                    for report in sweep.reports:
                        result.reports.append((where, report))
                    for label, series in sweep.series.items():
                        result.add_series(f"{where} {label}", series.times, series.values, sweep.fits.get(label))
                if 'lower-bound' in claims:
                    result.add_report(where, lower_bound_ratio(pair, d, datum, case.times, on_violation="report"))
                if 'log-band' in claims:
                    result.add_report(where, log_band_check(pair, d, datum, case.times))
                if 'large-time-profile' in claims:
                    for p in case.p:
                        result.add_report(f"{where} p={p:g}",
                                          large_time_profile(case.alpha, d, p, datum, case.times,
                                                             threads=self.threads, points=case.points))

    def _energy(self, case: ExperimentConfig, result: RunResult) -> None:
        claims = case.claims
        alpha = case.alpha
        if 'fundamental-identity' in claims:
            result.add_report(_context(case, "k=exp(-t) H=y^2 u=cos t"),
                              fundamental_identity_residual(exponential_kernel(), np.square, lambda y: 2.0 * y,
                                                            np.cos, np.linspace(0.0, 1.0, 21)))
        if 'l2-inequality' in claims:
            result.add_report(_context(case, f"{case.seeds} seeded fields"), self._l2_inequality(case.seeds))
        for d in case.dimensions:
            where = _context(case, f"alpha={alpha:g} d={d}")
            if 'power-bounds' in claims:
                result.add_report(where, energy_decay_check(alpha, d, t_max=case.t_max, points=case.points,
                                                            threads=self.threads))
            if 'dominance' in claims:
                datum = datum_from_dict(case.datum, d)
                result.add_report(where, comparison_dominance_check(alpha, d, case.times, datum, points=case.points))
            if 'mu-monotone' in claims:
                result.add_report(where, mu_monotonicity_check(alpha, 1.0 + 4.0 / d, points=case.points,
                                                               threads=self.threads))

    def _l2_inequality(self, seeds: int) -> ClaimReport:
        kernel = exponential_kernel()
        worst = np.inf
        failures = []
        for seed in range(seeds):
            v, v0 = random_smooth_field(seed)
            report = l2_norm_inequality_check(kernel, v, v0, step=0.05, cell_volume=1.0 / v.shape[1])
            worst = min(worst, report.measured['worst_relative_margin'])
            if not report.passed:
                failures.append(seed)
        return ClaimReport("l2-norm-inequality", not failures,
                           {'fields': seeds, 'failed_seeds': failures, 'worst_relative_margin': worst},
                           tolerance=config.get_tolerance("norm_inequality")).log()


# Measured keys shown in the summary, by priority
HEADLINE_KEYS = ('slope', 'max_error', 'worst_ratio', 'ratio', 'infimum', 'mass', 'relative_error',
                 'spread', 'residual', 'worst_relative_margin', 'max_deviation', 'largest_gap', 'violations')


def _format(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value).lower()
    if _is_number(value):
        return f"{value:.6g}"
    if isinstance(value, dict):
        return f"{sum(v for v in value.values() if _is_number(v)):g}"
    return str(value)


def headline(entry: Dict[str, Any]) -> str:
    """The one measured value that best summarizes a claim entry"""
    claim = entry.get('claim', "")
    measured = entry.get('measured', {})
    if claim.endswith("lp-membership"):
        expected = "divergence" if entry.get('target') == "divergent" else "finite norm"
        verdict = "confirmed" if entry.get('passed') else f"got {measured.get('status')}"
        return f"{expected} expected: {verdict}"
    if claim == "smu-bounds":
        margin = max(measured.get('worst_lower_violation', 0.0), measured.get('worst_upper_violation', 0.0))
        return f"worst margin {_format(margin)}"
    if claim == "complete-monotonicity":
        return f"violations {len(entry.get('details', {}).get('violations', []))}"
    if claim == "taylor-derivative-bound":
        return f"lhs {_format(measured.get('lhs'))} <= {_format(measured.get('bound'))}"
    if claim == "kochubei-bounds":
        changes = measured.get('relative_changes', {})
        return f"max change {_format(max(changes.values()) if changes else None)}"
    for key in HEADLINE_KEYS:
        if key in measured:
            return f"{key} {_format(measured[key])}"
    return "-"


def summary_table(report: Dict[str, Any]) -> str:
    """Text table of claim, target, measured and verdict"""
    rows = [("claim", "target", "measured", "pass")]
    for entry in report.get('claims', []):
        context = entry.get('context', "")
        rows.append((f"{entry.get('claim')} [{context}]" if context else str(entry.get('claim')),
                     _format(entry.get('target')), headline(entry), "pass" if entry.get('passed') else "FAIL"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * width for width in widths))
    verdict = "PASSED" if report.get('passed') else "FAILED"
    lines.append("")
    lines.append(f"{report.get('name', '')} ({report.get('kind', '')}): {verdict}")
    return "\n".join(lines) + "\n"


def emit_report(directory: str) -> str:
    """Summarize a run directory and write gnuplot data per series

    Returns:
        The summary table, also written to summary.txt

    Raises:
        MissingArtifactError: the directory lacks run artifacts
    """
    missing = [name for name in (REPORT_FILE, SERIES_FILE, FIT_FILE)
               if not os.path.isfile(os.path.join(directory, name))]
    if missing:
        raise MissingArtifactError(
            f"{directory} is missing {', '.join(missing)}; "
            f"run `subdecay run <config|preset> --out {directory}` first", missing)

    report = read_json(os.path.join(directory, REPORT_FILE))
    fits = read_json(os.path.join(directory, FIT_FILE))
    header, values = read_csv(os.path.join(directory, SERIES_FILE))
    if header != ["series", "t", "value"]:
        raise MissingArtifactError(f"{SERIES_FILE} in {directory} has an unexpected header {header}",
                                   [SERIES_FILE])

    plots = os.path.join(directory, PLOTS_DIR)
    for entry in fits.get('series', []):
        index = entry['index']
        rows = values[values[:, 0] == index]
        write_gnuplot(os.path.join(plots, f"series_{index:03d}.dat"), rows[:, 1], rows[:, 2], entry['label'])

    text = summary_table(report)
    with open(os.path.join(directory, SUMMARY_FILE), 'w') as f:
        f.write(text)
    logger.info(f"Wrote summary and {len(fits.get('series', []))} plot file(s) in {directory}")
    return text
