"""Proof-checking kernel for the lambda-free frameworks TF and TF_k, with
translations to and from the traditional framework LF."""

__version__ = "0.1.0"
