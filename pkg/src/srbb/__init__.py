"""Self-repellent Brownian bridges: Monte Carlo weights, lace combinatorics,
cycle-weighted partitions, variational thermodynamics and Green-function
deconvolution."""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
