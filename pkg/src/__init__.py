"""labgan - Synthetic drug-exposed laboratory time series with GANs."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("labgan")
except PackageNotFoundError:
    __version__ = "unknown"
