#!/usr/bin/env python3
"""
Tests for the command-line interface
"""

import io
import os
import json
import shutil
import tempfile
import unittest
from unittest import mock

from subdecay.__main__ import main
from subdecay.errors import SolverError
from subdecay.reports import ClaimReport


def run_cli(*argv):
    """Run main() with argv; return (exit code, stdout, stderr)"""
    stdout, stderr = io.StringIO(), io.StringIO()
    with mock.patch('sys.argv', ['subdecay'] + list(argv)), \
            mock.patch('sys.stdout', stdout), mock.patch('sys.stderr', stderr):
        code = main()
    return code, stdout.getvalue(), stderr.getvalue()


class TestCli(unittest.TestCase):
    """Test commands and exit codes"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.config_path = os.path.join(self.temp_dir, "envelope.json")
        with open(self.config_path, 'w') as f:
            json.dump({"name": "envelope", "kind": "bounds-suite", "claims": ["ml-envelope"],
                       "alphas": [0.3, 0.7]}, f)
        self.out = os.path.join(self.temp_dir, "out")

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_no_command(self):
        """Test that a bare invocation is a usage error"""
        code, stdout, _ = run_cli()
        self.assertEqual(code, 2)
        self.assertIn("Examples:", stdout)

    def test_bad_arguments(self):
        """Test that argparse usage errors exit with 2"""
        with self.assertRaises(SystemExit) as cm:
            run_cli("run")
        self.assertEqual(cm.exception.code, 2)

    def test_empty_config(self):
        """Test that an empty config file is a usage error"""
        path = os.path.join(self.temp_dir, "empty.json")
        open(path, 'w').close()
        code, _, stderr = run_cli("run", path, "--out", self.out)
        self.assertEqual(code, 2)
        self.assertIn("Empty configuration", stderr)

    def test_run_and_report(self):
        """Test a passing run followed by a report"""
        code, stdout, _ = run_cli("run", self.config_path, "--out", self.out, "--threads", "2")
        self.assertEqual(code, 0)
        self.assertIn("1/1 claims passed", stdout)
        code, stdout, _ = run_cli("report", self.out)
        self.assertEqual(code, 0)
        self.assertIn("ml-envelope", stdout)
        self.assertIn("PASSED", stdout)

    def test_claim_failure(self):
        """Test that a failed claim exits with 1"""
        failing = ClaimReport("ml-envelope", False, {'violations': {'0.3': 1}})
        with mock.patch('subdecay.main.mittag_leffler_envelope_check', return_value=failing):
            code, stdout, _ = run_cli("run", self.config_path, "--out", self.out)
        self.assertEqual(code, 1)
        self.assertIn("FAIL ml-envelope", stdout)

    def test_module_error(self):
        """Test that a module error during a run exits with 1"""
        with mock.patch('subdecay.main.mittag_leffler_envelope_check', side_effect=SolverError("no pivot")):
            code, _, _ = run_cli("run", self.config_path, "--out", self.out)
        self.assertEqual(code, 1)

    def test_invalid_flags(self):
        """Test flag ranges"""
        self.assertEqual(run_cli("run", self.config_path, "--threads", "0")[0], 2)
        self.assertEqual(run_cli("run", self.config_path, "--tol-scale", "-1")[0], 2)

    def test_report_missing_artifacts(self):
        """Test that reporting an empty directory exits with 2"""
        code, _, stderr = run_cli("report", self.temp_dir)
        self.assertEqual(code, 2)
        self.assertIn("report.json", stderr)

    def test_presets(self):
        """Test presets list and show"""
        code, stdout, _ = run_cli("presets", "list")
        self.assertEqual(code, 0)
        self.assertIn("frac-l2-d3", stdout)
        code, stdout, _ = run_cli("presets", "show", "frac-l2-d3")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)['kind'], "decay-sweep")
        code, _, _ = run_cli("presets", "show", "missing")
        self.assertEqual(code, 2)

    def test_unknown_preset(self):
        """Test that run with an unknown preset is a config error"""
        code, _, stderr = run_cli("run", "missing-preset", "--out", self.out)
        self.assertEqual(code, 2)
        self.assertIn("missing-preset", stderr)


if __name__ == '__main__':
    unittest.main()
