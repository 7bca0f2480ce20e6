"""Shared pytest configuration for the magiclbm test suite."""

from hypothesis import settings

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")
