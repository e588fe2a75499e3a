"""
Solver module.

The regularized Gauss-Newton subproblem, the MPG-N outer loop and the
projected gradient baseline, sharing one result and trace format.
"""
