"""
Experiment module.

Recovery experiments comparing MPG-N with projected gradient descent.
"""
