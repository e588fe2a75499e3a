"""
Residual model module.

The ResidualModel abstraction, the merit function and the derivative
oracles used to validate Jacobians.
"""
