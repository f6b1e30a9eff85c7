#!/usr/bin/env python3
"""
Setup script for subdecay

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

from setuptools import setup, find_namespace_packages

setup(
    name="subdecay",
    version="0.1.0",
    description="Decay checks for subdiffusion equations with memory kernels",
    package_dir={"": "src"},
    packages=find_namespace_packages(where="src"),
    package_data={"subdecay": ["presets/*.json"]},
    include_package_data=True,
    entry_points={
        "console_scripts": [
            "subdecay=subdecay.__main__:main",
        ],
    },
    install_requires=[
        "numpy>=1.20.0",  # Arrays, FFTs and linear algebra
        "scipy>=1.7.0",   # Special functions, quadrature and root finding
        "tqdm>=4.60.0",   # For progress bars
    ],
    extras_require={},
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU Affero General Public License v3",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
