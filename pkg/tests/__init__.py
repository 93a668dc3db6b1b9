"""
Test package for LogStack.

Contains unit and integration tests for all components.
"""

