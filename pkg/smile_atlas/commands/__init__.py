"""Subcommand modules for the smile-atlas CLI."""
