#!/usr/bin/env python3
"""
Tests for experiment configs, the runner and report emission
"""

import os
import json
import shutil
import tempfile
import unittest
from unittest import mock

from subdecay.errors import ConfigError, DomainError, MissingArtifactError
from subdecay.main import (
    ExperimentConfig, ExperimentRunner, RunResult, emit_report, headline, list_presets, load_config,
)
from subdecay.reports import ClaimReport
from subdecay.utils.artifacts import read_csv, read_json
from subdecay.utils.config import config

ENVELOPE_CONFIG = {"name": "envelope", "kind": "bounds-suite", "claims": ["ml-envelope"], "alphas": [0.5]}


class TestExperimentConfig(unittest.TestCase):
    """Test parsing and validation of experiment configs"""

    def test_defaults(self):
        """Test that a bare kind runs every claim with default parameters"""
        experiment = ExperimentConfig.from_text('{"kind": "decay-sweep"}', "sweep.json")
        self.assertEqual(experiment.name, "sweep")
        self.assertEqual(experiment.claims[0], "decay")
        self.assertEqual(experiment.dimensions, [1])
        self.assertEqual(experiment.r, 2.0)
        self.assertAlmostEqual(experiment.t_lo, 1e2)
        self.assertAlmostEqual(experiment.t_hi, 1e6)
        self.assertEqual(experiment.cases, [experiment])

    def test_empty_config(self):
        """Test that empty text is refused"""
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_text("  \n")
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig.from_text("{}")
        self.assertEqual(cm.exception.field, "kind")

    def test_invalid_json_line(self):
        """Test that JSON syntax errors carry the line"""
        text = '{\n  "kind": "energy",\n  "alpha": ,\n  "dimensions": [2]\n}'
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig.from_text(text)
        self.assertEqual(cm.exception.line, 3)

    def test_unknown_field(self):
        """Test that a misspelt field is rejected with its line"""
        text = '{\n  "kind": "energy",\n  "alhpa": 0.5\n}'
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig.from_text(text)
        self.assertEqual(cm.exception.field, "alhpa")
        self.assertEqual(cm.exception.line, 3)
        self.assertIn("line 3", str(cm.exception))

    def test_wrong_type(self):
        """Test that booleans and strings are not numbers"""
        with self.assertRaises(ConfigError):
            ExperimentConfig({"kind": "energy", "alpha": True})
        with self.assertRaises(ConfigError):
            ExperimentConfig({"kind": "energy", "alpha": "0.5"})

    def test_unknown_claim(self):
        """Test that claims must belong to the kind"""
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig({"kind": "energy", "claims": ["mass"]})
        self.assertEqual(cm.exception.field, "claims")

    def test_unknown_pair_family(self):
        """Test that pair errors point at the family line"""
        text = '{\n  "kind": "decay-sweep",\n  "pair": {\n    "family": "nope"\n  }\n}'
        with self.assertRaises(ConfigError) as cm:
            ExperimentConfig.from_text(text)
        self.assertEqual(cm.exception.field, "pair.family")
        self.assertEqual(cm.exception.line, 4)

    def test_ranges(self):
        """Test parameter ranges"""
        for data in ({"kind": "decay-sweep", "r": 1},
                     {"kind": "decay-sweep", "dimensions": [0]},
                     {"kind": "decay-sweep", "times": {"t_lo": 10.0, "t_hi": 1.0}},
                     {"kind": "decay-sweep", "times": {"t_lo": 1.0, "t_hi": 10.0, "step": 2}},
                     {"kind": "decay-sweep", "psi": {"power": -1}},
                     {"kind": "energy", "alpha": 1.5},
                     {"kind": "energy", "tolerances": {"slope": -1}},
                     {"kind": "energy", "tolerances": {"slopes": 0.1}}):
            with self.assertRaises(ConfigError, msg=str(data)):
                ExperimentConfig(data)

    def test_alpha_from_pair(self):
        """Test that alpha defaults to the order of a fractional pair"""
        experiment = ExperimentConfig({"kind": "fundsol", "pair": {"family": "fractional", "alpha": 0.3}})
        self.assertAlmostEqual(experiment.alpha, 0.3)

    def test_cases(self):
        """Test that cases override base fields and merge tolerances"""
        experiment = ExperimentConfig({
            "kind": "decay-sweep",
            "dimensions": [1],
            "tolerances": {"slope": 0.05, "mass": 1e-3},
            "cases": [{"dimensions": [2]}, {"label": "d5", "dimensions": [5], "tolerances": {"slope": 0.07}}],
        })
        self.assertEqual(len(experiment.cases), 2)
        first, second = experiment.cases
        self.assertEqual(first.dimensions, [2])
        self.assertEqual(first.label, "case 0")
        self.assertEqual(second.label, "d5")
        self.assertEqual(second.tolerances, {"slope": 0.07, "mass": 1e-3})

    def test_case_cannot_change_kind(self):
        """Test that cases keep the experiment kind"""
        with self.assertRaises(ConfigError):
            ExperimentConfig({"kind": "energy", "cases": [{"kind": "fundsol"}]})

    def test_presets_are_valid(self):
        """Test that every packaged preset loads and is named after its file"""
        presets = list_presets()
        names = [name for name, _ in presets]
        self.assertIn("frac-l2-d3", names)
        self.assertIn("ultraslow-l2-d1", names)
        for name, description in presets:
            experiment = load_config(name)
            self.assertEqual(experiment.name, name)
            self.assertTrue(description)

    def test_unknown_source(self):
        """Test that a missing file that is not a preset is a config error"""
        with self.assertRaises(ConfigError):
            load_config("no-such-preset")


class TestRunner(unittest.TestCase):
    """Test ExperimentRunner"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_envelope_run(self):
        """Test a run end to end and its artifacts"""
        out = os.path.join(self.temp_dir, "run")
        result = ExperimentRunner(ExperimentConfig(ENVELOPE_CONFIG), output_dir=out).run()
        self.assertTrue(result.passed)
        for name in ("series.csv", "fit.json", "report.json"):
            self.assertTrue(os.path.isfile(os.path.join(out, name)))
        report = read_json(os.path.join(out, "report.json"))
        self.assertTrue(report['passed'])
        self.assertEqual(report['kind'], "bounds-suite")
        self.assertEqual(report['claims'][0]['claim'], "ml-envelope")

    def test_reproducible_artifacts(self):
        """Test that two runs write identical bytes"""
        contents = []
        for name in ("a", "b"):
            out = os.path.join(self.temp_dir, name)
            ExperimentRunner(ExperimentConfig(ENVELOPE_CONFIG), output_dir=out).run()
            with open(os.path.join(out, "report.json"), "rb") as f:
                contents.append(f.read())
        self.assertEqual(contents[0], contents[1])

    def test_tolerance_scale_restored(self):
        """Test that per-run tolerances do not leak into the global config"""
        before = config.get_tolerance("slope")
        experiment = ExperimentConfig(dict(ENVELOPE_CONFIG, tolerances={"slope": 0.5}))
        ExperimentRunner(experiment, output_dir=self.temp_dir, tolerance_scale=3.0).run()
        self.assertEqual(config.get_tolerance("slope"), before)

    def test_failed_claim(self):
        """Test that a failing claim fails the run but still writes artifacts"""
        failing = ClaimReport("ml-envelope", False, {'violations': {'0.5': 3}})
        with mock.patch('subdecay.main.mittag_leffler_envelope_check', return_value=failing):
            result = ExperimentRunner(ExperimentConfig(ENVELOPE_CONFIG), output_dir=self.temp_dir).run()
        self.assertFalse(result.passed)
        self.assertFalse(read_json(os.path.join(self.temp_dir, "report.json"))['passed'])

    def test_module_error(self):
        """Test that module errors propagate out of a run"""
        with mock.patch('subdecay.main.mittag_leffler_envelope_check', side_effect=DomainError("bad alpha")):
            with self.assertRaises(DomainError):
                ExperimentRunner(ExperimentConfig(ENVELOPE_CONFIG), output_dir=self.temp_dir).run()

    @mock.patch('subdecay.main.os.access')
    def test_unwritable_output(self, mock_access):
        """Test that an unwritable output directory is a config error"""
        mock_access.return_value = False
        with self.assertRaises(ConfigError) as cm:
            ExperimentRunner(ExperimentConfig(ENVELOPE_CONFIG), output_dir=self.temp_dir).run()
        self.assertEqual(cm.exception.field, "output_dir")

    def test_identity_claim(self):
        """Test the fundamental identity through the energy kind"""
        experiment = ExperimentConfig({"kind": "energy", "claims": ["fundamental-identity"]})
        result = ExperimentRunner(experiment, output_dir=self.temp_dir).run()
        self.assertTrue(result.passed)
        self.assertEqual(result.reports[0][1].claim, "fundamental-identity")


class TestEmitReport(unittest.TestCase):
    """Test the summary table and plot data"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write_artifacts(self):
        result = RunResult("synthetic", "fundsol")
        result.add_report("fractional(alpha=0.5) d=4 p=2",
                          ClaimReport("z-lp-membership", True, {'status': 'divergent'}, target="divergent"))
        result.add_report("fractional(alpha=0.5) d=3",
                          ClaimReport("z-lp-decay", True, {'slope': -0.37}, target=-0.375, tolerance=0.05,
                                      details={'times': [1.0, 10.0, 100.0], 'values': [1.0, 0.5, 0.25]}))
        result.write(self.temp_dir)
        return result

    def test_missing_artifacts(self):
        """Test that an empty directory lists what is missing"""
        with self.assertRaises(MissingArtifactError) as cm:
            emit_report(self.temp_dir)
        self.assertEqual(sorted(cm.exception.missing), ["fit.json", "report.json", "series.csv"])
        self.assertIn("subdecay run", str(cm.exception))

    def test_summary(self):
        """Test the summary rows and the gnuplot file"""
        self._write_artifacts()
        text = emit_report(self.temp_dir)
        self.assertIn("divergence expected: confirmed", text)
        self.assertIn("slope -0.37", text)
        self.assertIn("synthetic (fundsol): PASSED", text)
        self.assertTrue(os.path.isfile(os.path.join(self.temp_dir, "summary.txt")))
        with open(os.path.join(self.temp_dir, "plots", "series_000.dat")) as f:
            lines = f.read().splitlines()
        self.assertTrue(lines[0].startswith("# fractional(alpha=0.5) d=3 z-lp-decay"))
        self.assertEqual(len(lines), 4)

    def test_series_artifacts(self):
        """Test the long series format and the fit index"""
        self._write_artifacts()
        header, values = read_csv(os.path.join(self.temp_dir, "series.csv"))
        self.assertEqual(header, ["series", "t", "value"])
        self.assertEqual(values.shape, (3, 3))
        with open(os.path.join(self.temp_dir, "fit.json")) as f:
            fits = json.load(f)
        self.assertEqual(fits['series'][0]['index'], 0)
        self.assertEqual(fits['series'][0]['points'], 3)

    def test_headline(self):
        """Test headline choices"""
        self.assertEqual(headline({'claim': 'z-lp-membership', 'target': 'finite', 'passed': False,
                                   'measured': {'status': 'divergent'}}),
                         "finite norm expected: got divergent")
        self.assertEqual(headline({'claim': 'smu-bounds', 'measured': {'worst_lower_violation': 0.0,
                                                                       'worst_upper_violation': 2e-4}}),
                         "worst margin 0.0002")
        self.assertEqual(headline({'claim': 'ml-envelope', 'measured': {'violations': {'0.5': 0}}}),
                         "violations 0")
        self.assertEqual(headline({'claim': 'unknown', 'measured': {}}), "-")


if __name__ == '__main__':
    unittest.main()
