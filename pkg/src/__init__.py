"""
Power-Flow Gauss-Newton Bench Package

A modular application for solving box-constrained nonlinear least-squares
problems with a modified projected Gauss-Newton method and benchmarking it
against projected gradient descent on power-flow recovery.
"""

__version__ = "1.0.0"
__author__ = "Power-Flow Gauss-Newton Bench"
