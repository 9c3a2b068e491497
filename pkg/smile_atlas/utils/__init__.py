"""Utility helpers: logging, errors and run configuration."""
