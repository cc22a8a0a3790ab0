"""ergolab: correlation sequences, ultrafilter-limit proxies, spectral estimates
and finite joinings for explicit measure-preserving systems."""

__version__ = "0.1.0"
