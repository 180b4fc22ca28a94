# -*- coding: utf-8 -*-
#
# Sphinx configuration of the PIL Lab documentation.
# API pages are generated into _apidoc/ before the build:
#
#   sphinx-apidoc -e -f -M -o docs/_apidoc pil_lab
#   sphinx-build -b html docs docs/_build/html

# -- Path setup --------------------------------------------------------------
import os
import sys

sys.path.insert(0, os.path.abspath(r".."))

from pil_lab.__about__ import (  # noqa: E402
    __author__,
    __copyright__,
    __summary__,
    __title__,
    __version__,
)

# -- Project information -----------------------------------------------------
project = __title__
author = __author__
copyright = __copyright__
version = release = __version__

# -- General configuration ---------------------------------------------------
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.coverage",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
]

autodoc_member_order = "bysource"
autodoc_default_options = {"members": True, "undoc-members": False, "show-inheritance": True}

templates_path = ["_templates"]
source_suffix = [".rst"]
master_doc = "index"
language = None
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store", "results/*", "*.csv", "*.log"]
pygments_style = "sphinx"

# -- Options for HTML output -------------------------------------------------
html_theme = "sphinx_rtd_theme" if os.environ.get("READTHEDOCS") == "True" else "alabaster"
html_static_path = []
htmlhelp_basename = "PilLabdoc"
html_theme_options = {"description": __summary__}

# -- Options for LaTeX and manual pages --------------------------------------
latex_documents = [(master_doc, "PilLab.tex", "PIL Lab Documentation", author, "manual")]
man_pages = [(master_doc, "pil-lab", "PIL Lab Documentation", [author], 1)]
