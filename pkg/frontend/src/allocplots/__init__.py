"""Batch figures from walkalloc experiment CSVs."""

__version__ = "0.1.0"

from .plotting import (KINDS, PlotJob, SchemaError, aggregate_by_group,
                       aggregate_by_l, plot, read_rows)
