"""Pydantic models used across the library and the CLI."""
