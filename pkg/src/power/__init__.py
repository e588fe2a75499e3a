"""
Power-flow module.

Bus injection functions, their Jacobian and the mismatch residual model
for the power-flow analysis problem.
"""
