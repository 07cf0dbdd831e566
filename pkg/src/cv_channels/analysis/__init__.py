"""Nonclassicality, correlation and contraction diagnostics."""
