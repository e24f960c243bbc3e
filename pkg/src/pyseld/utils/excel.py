"""write excel methods"""
from __future__ import annotations

import math
import os
from typing import Literal, Mapping

import numpy as np
import pandas as pd

from pyseld.optional import import_optional_dependency


def _handle_nans(worksheet, row: int, col: int, number: float, cell_format=None) -> Literal[-1, 0]:
    """handle nan values and convert float to numpy.float64"""

    # write NaN as NA
    if np.isnan(number):
        return worksheet.write_formula(row, col, "=NA()", cell_format, "#N/A")

    # set decimal precision
    number = math.ceil(number * 1e10) / 1e10

    return worksheet.write_number(row, col, number, cell_format)


def add_frame(name: str, frame: pd.DataFrame, workbook, column_width: int | None = 14):
    """create worksheet from frame, index levels written as leading columns"""

    # add formats
    cell_format = workbook.add_format({"bold": True})

    # add worksheet and nan handler
    worksheet = workbook.add_worksheet(str(name)[:31])
    worksheet.add_write_handler(float, _handle_nans)

    # flatten index into columns
    frame = frame.reset_index() if any(frame.index.names) else frame

    # write header
    for col_num, cell_data in enumerate(frame.columns.values):
        worksheet.write(0, col_num, str(cell_data), cell_format)

    # freeze header and set widths
    worksheet.freeze_panes(1, 0)
    if column_width is not None:
        worksheet.set_column(0, len(frame.columns) - 1, column_width)

    # write cell values
    for row_num, row_data in enumerate(frame.itertuples(index=False), start=1):
        for col_num, cell_data in enumerate(row_data):
            if isinstance(cell_data, (np.floating, np.integer)):
                cell_data = cell_data.item()
            worksheet.write(row_num, col_num, cell_data)

    return worksheet


def write_workbook(path: str | os.PathLike, frames: Mapping[str, pd.DataFrame]) -> None:
    """write one worksheet per frame"""

    xlsxwriter = import_optional_dependency("xlsxwriter")

    workbook = xlsxwriter.Workbook(str(path))
    try:
        for name, frame in frames.items():
            add_frame(name, frame, workbook)
    finally:
        workbook.close()
