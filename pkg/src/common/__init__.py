"""Shared utilities: configuration, logging and diagnostics."""
