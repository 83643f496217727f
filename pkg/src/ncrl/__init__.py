"""Noncommutative representation lab: Born-rule state fitting and its limits."""

__version__ = "0.1.0"
