"""
Feasible set module.

Boxes (the constraint set C) and Euclidean balls (the dual feasible set)
together with their exact projections.
"""

from .feasible import BallSet, BoxSet, contains, project_ball, project_box

__all__ = ['BallSet', 'BoxSet', 'contains', 'project_ball', 'project_box']
