"""Experiment driver: completeness and soundness sweeps, the parameter cascade, reports and the CLI."""
