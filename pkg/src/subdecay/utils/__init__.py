"""
Utility modules for subdecay: configuration, grids, artifacts and progress
"""
