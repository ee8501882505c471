"""Exact and interval-certified checks for a weighted Bernstein argument
behind Liouville theorems for -Δv = N v^p + M |∇v|^q."""

__version__ = "0.1.0"
