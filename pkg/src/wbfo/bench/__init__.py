"""Benchmark harness: config parsing, trial batteries, CSV export and figures."""
