"""Punctuation perturbation and robustness evaluation for dependency treebanks."""

__version__ = "0.1.0"
