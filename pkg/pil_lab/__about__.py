#! python3  # noqa: E265

"""
    Metadata about the package to easily retrieve informations.
    see: https://packaging.python.org/guides/single-sourcing-package-version/
"""

# standard library
from datetime import date

__all__ = [
    "__author__",
    "__copyright__",
    "__email__",
    "__license__",
    "__summary__",
    "__title__",
    "__uri__",
    "__version__",
]


__title__ = "PIL Lab"
__summary__ = (
    "Model-based imitation learning laboratory: behavior cloning, rollout-based "
    "and predictive imitation learning with multi-step predictors."
)
__uri__ = "https://pypi.org/project/pil-lab/"

__version__ = "1.0.0"

__author__ = "PIL Lab contributors"
__email__ = "pil-lab@users.noreply.github.com"

__license__ = "GNU Lesser General Public License v3.0"
__copyright__ = "2025 - {0}, {1}".format(date.today().year, __author__)
