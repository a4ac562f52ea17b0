# -*- coding: utf-8 -*-
"""
ca2n.utils.runlog
~~~~~~~~~~~~~~~~~

CSV loss logs with a fixed header.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import csv
import logging
import os

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value):
    """Formats a number for a log or report cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value == float("inf"):
        return "inf"
    return repr(value)


class LossLog(object):
    """Appends rows to a CSV file whose header is fixed at creation.

    :param path: Target file, ``None`` keeps the rows in memory only.
    :param columns: Column names, written once as the header.
    """

    def __init__(self, path, columns):
        self.path = path
        self.columns = list(columns)
        self.rows = []
        if path is not None:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, "w", newline="") as fh:
                csv.writer(fh).writerow(self.columns)

    def write(self, **values):
        """Adds one row; missing columns are left empty."""
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError("unknown log columns: {}".format(", ".join(sorted(unknown))))
        row = [format_value(values.get(column)) for column in self.columns]
        self.rows.append(row)
        if self.path is not None:
            with open(self.path, "a", newline="") as fh:
                csv.writer(fh).writerow(row)
        return row


def stage2_columns(terms):
    """Header of the stage 2 log: the step, the discriminator loss, the
    objective, then raw and weighted value per enabled term."""
    columns = ["step", "d_loss", "objective"]
    for term in terms:
        columns.extend(["{}_raw".format(term), "{}_weighted".format(term)])
    columns.append("induced_grad_norm")
    return columns


STAGE1_COLUMNS = ["epoch", "component", "l1"]
