"""Service and CLI entry points."""
