#!/usr/bin/env python3
"""
Configuration module for subdecay

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""

import os
import copy
import json
import logging
from contextlib import contextmanager
from typing import Dict, Any, Iterator, Optional

# Configure logging
logger = logging.getLogger(__name__)

# Default output location for experiment artifacts
DEFAULT_OUTPUT_DIR = os.path.expanduser("~/subdecay_runs")

# Configuration file location
CONFIG_DIR = os.path.expanduser("~/.config/subdecay")
CONFIG_FILE = os.path.join(CONFIG_DIR, "config.json")

DEFAULT_TOLERANCES = {
    "pair_certificate": 1e-3,
    "oracle": 1e-4,
    "closed_form_pair": 1e-6,
    "smu_bounds": 1e-3,
    "monotonicity": 1e-9,
    "slope": 0.05,
    "weak_slope": 0.07,
    "energy_slope": 0.03,
    "mass": 1e-3,
    "negativity": 1e-6,
    "msd": 1e-2,
    "hankel_tail": 1e-10,
    "radial_refine": 1e-6,
    "boundary_shell": 1e-12,
    "aliasing": 1e-3,
    "multiplier_spread": 0.1,
    "identity_residual": 1e-6,
    "norm_inequality": 1e-10,
    "dominance": 1e-2,
    "newton": 1e-12,
}

DEFAULT_RESOLUTION = {
    "relaxation_points": 2048,
    "deconvolution_points": 4000,
    "grade": 2.0,
    "gauss_legendre_nodes": 64,
    "panel_nodes": 16,
    "panels_per_decade": 4,
    "radial_points": 160,
    "mu_points_per_decade": 16,
    "grid_points": 1024,
}

DEFAULT_CONFIG = {
    "output_dir": DEFAULT_OUTPUT_DIR,
    "threads": 1,
    "box_safety": 12.0,
    "tolerances": DEFAULT_TOLERANCES,
    "resolution": DEFAULT_RESOLUTION,
}


class Config:
    """Configuration manager for subdecay"""

    def __init__(self, config_file: str = CONFIG_FILE):
        """Initialize the configuration manager"""
        self.config_file = config_file
        self.config = self._load_config()
        self.tolerance_scale = 1.0
        self.overrides: Dict[str, float] = {}

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file or create default"""
        defaults = copy.deepcopy(DEFAULT_CONFIG)

        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r') as f:
                    stored = json.load(f)
                logger.info(f"Loaded configuration from {self.config_file}")
                # Stored values override defaults section by section
                for key, value in stored.items():
                    if isinstance(value, dict) and isinstance(defaults.get(key), dict):
                        defaults[key].update(value)
                    else:
                        defaults[key] = value
                return defaults
            except (json.JSONDecodeError, IOError) as e:
                logger.error(f"Error loading configuration: {e}")
                # Fall back to default config
                return defaults

        # Save default config
        self._save_config(defaults)
        return defaults

    def _save_config(self, config: Dict[str, Any]) -> bool:
        """Save configuration to file"""
        try:
            os.makedirs(os.path.dirname(self.config_file), exist_ok=True)
            with open(self.config_file, 'w') as f:
                json.dump(config, f, indent=2)
            logger.debug(f"Saved configuration to {self.config_file}")
            return True
        except (IOError, OSError) as e:
            logger.warning(f"Error saving configuration: {e}")
            return False

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value"""
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> bool:
        """Set a configuration value"""
        self.config[key] = value
        return self._save_config(self.config)

    def get_output_dir(self) -> str:
        """Get the configured artifact directory"""
        return os.path.expanduser(self.config.get("output_dir", DEFAULT_OUTPUT_DIR))

    def get_threads(self) -> int:
        """Get the default worker count for sweeps"""
        return max(1, int(self.config.get("threads", 1)))

    def get_box_safety(self) -> float:
        """Get the safety factor applied to spatial box sizes"""
        return float(self.config.get("box_safety", 12.0))

    def get_tolerance(self, name: str) -> float:
        """Get a named tolerance, scaled by the active tolerance scale

        Args:
            name: Tolerance name (see DEFAULT_TOLERANCES)

        Returns:
            The tolerance value
        """
        if name in self.overrides:
            return self.overrides[name] * self.tolerance_scale
        tolerances = self.config.get("tolerances", {})
        if name not in tolerances and name not in DEFAULT_TOLERANCES:
            raise KeyError(f"Unknown tolerance: {name}")
        value = tolerances.get(name, DEFAULT_TOLERANCES.get(name))
        return float(value) * self.tolerance_scale

    def set_tolerance(self, name: str, value: float) -> bool:
        """Set a named tolerance

        Args:
            name: Tolerance name
            value: New positive value

        Returns:
            Whether the operation was successful
        """
        if name not in DEFAULT_TOLERANCES:
            logger.error(f"Unknown tolerance: {name}")
            return False
        try:
            value = float(value)
        except (TypeError, ValueError):
            logger.error(f"Tolerance {name} must be a number, got {value!r}")
            return False
        if not value > 0:
            logger.error(f"Tolerance {name} must be positive, got {value}")
            return False

        self.config.setdefault("tolerances", {})[name] = value
        return self._save_config(self.config)

    def get_resolution(self, name: str) -> Any:
        """Get a solver resolution setting (not affected by the tolerance scale)"""
        resolution = self.config.get("resolution", {})
        if name not in resolution and name not in DEFAULT_RESOLUTION:
            raise KeyError(f"Unknown resolution setting: {name}")
        return resolution.get(name, DEFAULT_RESOLUTION.get(name))

    def set_tolerance_scale(self, scale: float) -> None:
        """Scale every tolerance for the current process (the --tol-scale flag)"""
        if not scale > 0:
            raise ValueError(f"Tolerance scale must be positive, got {scale}")
        self.tolerance_scale = float(scale)
        logger.info(f"Tolerance scale set to {scale}")

    @contextmanager
    def tolerance_overrides(self, overrides: Optional[Dict[str, float]] = None,
                            scale: Optional[float] = None) -> Iterator["Config"]:
        """Apply per-run tolerance values and scale without touching the config file

        Raises:
            KeyError: an override names an unknown tolerance
            ValueError: an override or the scale is not a positive number
        """
        overrides = dict(overrides or {})
        for name, value in overrides.items():
            if name not in DEFAULT_TOLERANCES:
                raise KeyError(f"Unknown tolerance: {name}")
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ValueError(f"Tolerance {name} must be a positive number, got {value!r}")
        saved = (dict(self.overrides), self.tolerance_scale)
        self.overrides.update({name: float(value) for name, value in overrides.items()})
        if scale is not None:
            self.set_tolerance_scale(scale)
        try:
            yield self
        finally:
            self.overrides, self.tolerance_scale = saved


# Create a singleton instance
config = Config()
