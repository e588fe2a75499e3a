"""
Data handling module for power-system cases.

This module contains classes and functions for parsing MATPOWER case
files, loading the bundled IEEE cases and assembling admittance matrices.
"""
