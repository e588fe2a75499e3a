"""
Diagnostics module.

Post-hoc analysis of solver traces.
"""
