"""
nekholab test suite.
"""
