"""
Utilities module for the Gauss-Newton solver package.

This module contains the settings loader, logging setup and small
linear algebra helpers used across the solvers.
"""
