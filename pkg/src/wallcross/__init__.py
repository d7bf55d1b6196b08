"""Wall-crossing for Fermat hybrid models: mu-series, correlator bookkeeping and localization checks."""

__version__ = "0.1.0"
