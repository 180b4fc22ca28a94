# coding: utf-8
#! python3  # noqa: E265

from .csv_reporter import (  # noqa: F401
    RESULTS_HEADERS,
    CsvReporter,
    format_value,
    read_csv_rows,
)
