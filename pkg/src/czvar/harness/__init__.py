"""Experiment orchestration: configuration, experiments, reports and figures."""
