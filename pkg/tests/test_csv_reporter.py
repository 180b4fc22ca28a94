# -*- coding: UTF-8 -*-
#! python3

"""
    Usage from the repo root folder:

    ```python
    python -m unittest tests.test_csv_reporter
    ```
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import shutil
import unittest
from pathlib import Path

# 3rd party
import numpy as np

# modules
from pil_lab.reporters import RESULTS_HEADERS, CsvReporter, format_value, read_csv_rows

# #############################################################################
# ######## Globals #################
# ##################################

OUTPUT_DIR = Path(__file__).parent / "output" / "csv_reporter"

# #############################################################################
# ########## Classes ###############
# ##################################


class TestCsvReporter(unittest.TestCase):
    """Test CSV reporter."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def tearDown(self):
        """Executed after each test."""
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    #  -- Tests ------------------------------------------------------------
    def test_format_value(self):
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(np.bool_(False)), "false")
        self.assertEqual(format_value(np.int64(7)), "7")
        self.assertEqual(format_value(0.1), "0.1")
        self.assertEqual(float(format_value(np.float64(1 / 3))), 1 / 3)
        self.assertEqual(format_value("pil/state_noise"), "pil/state_noise")

    def test_write_and_read(self):
        path = OUTPUT_DIR / "results.csv"
        reporter = CsvReporter(csvpath=path)
        reporter.add_unique(
            {"experiment": "x", "method": "bc", "H": "", "seed": 0, "metric": "m", "value": 0.25, "config_hash": "h"}
        )
        reporter.add_multiple(
            [{"experiment": "x", "method": "pil", "H": 2, "seed": 1, "metric": "m", "value": 1e-20, "config_hash": "h"}]
        )
        self.assertEqual(reporter.rows_count, 2)
        headers, rows = read_csv_rows(path)
        self.assertEqual(headers, RESULTS_HEADERS)
        self.assertEqual(rows[0], ["x", "bc", "", "0", "m", "0.25", "h"])
        self.assertEqual(float(rows[1][5]), 1e-20)
        # unix line endings whatever the platform
        self.assertNotIn(b"\r\n", path.read_bytes())

    def test_headers_truncate(self):
        path = OUTPUT_DIR / "log.csv"
        CsvReporter(csvpath=path, headers=["a"]).add_unique({"a": 1})
        CsvReporter(csvpath=path, headers=["a"])
        self.assertEqual(read_csv_rows(path), (["a"], []))

    def test_bad_parameters(self):
        with self.assertRaises(TypeError):
            CsvReporter(csvpath="report.csv")
        with self.assertRaises(TypeError):
            CsvReporter(csvpath=OUTPUT_DIR / "r.csv", headers="a,b")
        with self.assertRaises(ValueError):
            CsvReporter(csvpath=OUTPUT_DIR / "r.csv", extrahead="skip")
        reporter = CsvReporter(csvpath=OUTPUT_DIR / "r.csv", headers=["a"])
        with self.assertRaises(ValueError):
            reporter.add_unique({"b": 1})
        with self.assertRaises(TypeError):
            reporter.add_unique([{"a": 1}])
        ignoring = CsvReporter(csvpath=OUTPUT_DIR / "i.csv", headers=["a"], extrahead="ignore")
        ignoring.add_unique({"a": 1, "b": 2})
        self.assertEqual(read_csv_rows(OUTPUT_DIR / "i.csv"), (["a"], [["1"]]))

    def test_empty_file(self):
        path = OUTPUT_DIR / "empty.csv"
        path.write_text("", encoding="utf-8")
        self.assertEqual(read_csv_rows(path), ([], []))


# ##############################################################################
# ##### Stand alone program ########
# ##################################
if __name__ == "__main__":
    unittest.main()
