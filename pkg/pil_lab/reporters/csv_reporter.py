# -*- coding: UTF-8 -*-
#! python3

"""
    CSV reporting of datasets, training logs, results and plot data.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import csv
import logging
from pathlib import Path

# 3rd party library
import numpy as np

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

# comma separated, "\n" line endings whatever the platform: outputs must be
# byte-identical across reruns and machines
csv.register_dialect("pil_lab", delimiter=",", lineterminator="\n")

RESULTS_HEADERS = ["experiment", "method", "H", "seed", "metric", "value", "config_hash"]

# #############################################################################
# ########## Functions #############
# ##################################


def format_value(value) -> str:
    """Serialize a cell. Floats use ``repr`` so that reading back is bit-exact.

    :param value: cell content
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


# #############################################################################
# ########## Classes ###############
# ##################################


class CsvReporter(object):
    """Produce CSV report. Built on top of standard 'csv.DictWriter' lib.

    See:
      - https://docs.python.org/3/library/csv.html#csv.DictWriter
    """

    def __init__(
        self,
        csvpath: Path = Path("./report.csv"),
        headers: list = RESULTS_HEADERS,
        extrahead: str = "raise",
    ):
        """
            Instanciate class, check parameters and write the header line.

            :param pathlib.Path csvpath: Path to the output file to write into. Default: `./report.csv`.
            :param list headers: list of CSV headers names (CSV first line).
                Default: the results headers.
            :param str extrahead: linked to the `extrasaction` option passed to the writer.
                It's the mode to handle cases where data is transmitted without header matching.
                Can be one of : `raise` or `ignore`. Default: `raise`.
        """
        # check parameters
        if not isinstance(csvpath, Path):
            raise TypeError(
                "CSV path must be a 'pathlib.Path' instance not {}".format(type(csvpath))
            )
        if not isinstance(headers, list):
            raise TypeError("Headers names must be a list, not {}".format(type(headers)))
        if extrahead.lower() not in ("raise", "ignore"):
            raise ValueError("extrahead ({}) must be 'raise' or 'ignore'".format(extrahead))
        # attributes
        self.dialect = "pil_lab"
        self.extrahead = extrahead.lower()
        self.headers = list(headers)
        self.csvpath = csvpath
        self.rows_count = 0

        # write headers
        self.csvpath.parent.mkdir(parents=True, exist_ok=True)
        self.write_headers()
        logger.debug("CsvReporter instanciated: {}".format(self.csvpath))

    def write_headers(self):
        """Write headers to the CSV, truncating any previous content."""
        with self.csvpath.open(mode="w", newline="", encoding="utf-8") as csvout:
            writer = csv.DictWriter(csvout, dialect=self.dialect, fieldnames=self.headers)
            writer.writeheader()
        logger.debug("Headers written: {}".format(self.headers))

    def add_unique(self, in_data: dict):
        """Add a single row to the CSV from the input data dictionary.

        :param dict in_data: Dictionary of data to be added.
            Expected structure: `{header: value}`
        """
        if not isinstance(in_data, dict):
            raise TypeError("Row must be a dict, not {}".format(type(in_data)))
        self.add_multiple([in_data])

    def add_multiple(self, in_data: list):
        """Add a set of rows to the CSV from the input list of data dictionaries.

        :param list in_data: list of dictionaries of data to be added.
            Expected structure: `[{header1: valueA}, {header2: valueB}]`
        """
        if not isinstance(in_data, list):
            raise TypeError("Rows must be a list, not {}".format(type(in_data)))

        with self.csvpath.open(mode="a", newline="", encoding="utf-8") as csvout:
            writer = csv.DictWriter(
                csvout,
                dialect=self.dialect,
                fieldnames=self.headers,
                extrasaction=self.extrahead,
            )
            writer.writerows(
                [{k: format_value(v) for k, v in row.items()} for row in in_data]
            )
        self.rows_count += len(in_data)
        logger.debug("{} rows added to the csv: {}".format(len(in_data), self.csvpath.name))


def read_csv_rows(csvpath: Path) -> tuple:
    """Read back a CSV written by :class:`CsvReporter`.

    :param pathlib.Path csvpath: file to read

    :return: (headers, rows) with rows as lists of raw strings
    """
    with Path(csvpath).open(mode="r", newline="", encoding="utf-8") as csvin:
        reader = csv.reader(csvin, dialect="pil_lab")
        try:
            headers = next(reader)
        except StopIteration:
            return [], []
        rows = [row for row in reader]
    return headers, rows
