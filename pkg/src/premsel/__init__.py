"""Premise selection and theorem proving for large first-order theories."""

import os

__version__ = "0.1.0"

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(*parts: str) -> str:
    """Path of a bundled data file, e.g. ``data_path("chain", "p01.p")``."""
    return os.path.join(DATA_DIR, *parts)
