"""Benchmark schemes, Monte Carlo experiments and result files."""
