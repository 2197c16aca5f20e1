"""
Package: common.

Package for the toolkit utilities: file emitters.
"""
from __future__ import annotations
