"""
Package: integration
Package for the integration tests.
"""
