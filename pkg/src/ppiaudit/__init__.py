"""Overlapping PPI module detection with auditable evidence bundles."""
