"""
subdecay - decay theory toolkit for non-local-in-time subdiffusion equations
"""

__version__ = '0.1.0'
