"""
Unit tests for norden-lab.
"""
