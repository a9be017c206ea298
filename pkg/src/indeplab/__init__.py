"""Executable skeletons of threshold, switch and diagonal machine constructions."""

from indeplab import combinators, constructions, diagonal, theory, tm  # noqa: F401  (registers machine tags)

__version__ = "0.1.0"
