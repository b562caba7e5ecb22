"""Character-level decoder-only trainer for string-rewriting datasets."""

__version__ = "0.1.0"
