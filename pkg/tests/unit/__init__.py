"""
Package: unit
Package for the unit tests.
"""
