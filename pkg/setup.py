# -*- coding: utf-8 -*-
#!/usr/bin/env python3

"""
    Setup script to package the PIL Lab Python module.
"""

# ############################################################################
# ########## Libraries #############
# ##################################

# standard library
import pathlib

from setuptools import find_packages, setup

# package (to get version)
from pil_lab import __about__

# SETUP ######################################################################

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

# setup metadata
setup(
    # meta
    name="pil-lab",
    version=__about__.__version__,
    author=__about__.__author__,
    author_email=__about__.__email__,
    description=__about__.__summary__,
    long_description=README,
    long_description_content_type="text/markdown",
    keywords="imitation learning behavior cloning LQR Riccati predictive control autodiff pendulum",
    license="LGPL3",
    url=__about__.__uri__,
    # dependencies
    install_requires=[
        "arrow>=0.14",
        "click>=7.0",
        "numpy>=1.17",
        "python-dotenv",
        "pyyaml>=5.1",
        "scipy>=1.3",
    ],
    extras_require={
        "dev": ["black", "flake8"],
        "test": ["pytest", "pytest-cov"],
    },
    python_requires=">=3.7, <4",
    entry_points={"console_scripts": ["pil-lab = pil_lab.cli:main"]},
    # packaging
    packages=find_packages(
        exclude=["contrib", "docs", "*.tests", "*.tests.*", "tests.*", "tests"]
    ),
    include_package_data=True,
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: GNU Lesser General Public License v3 (LGPLv3)",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
)
