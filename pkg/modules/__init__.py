"""
Wronski Count - Modules Package

Counting routes (closed formula, Schubert calculus, sl2 representations),
polynomial planes and their Wronskians, the master-function solver and the
command-line surface.
"""

__version__ = "1.0.0"
