"""Cahn-Hilliard energy-barrier toolkit"""
__version__ = "1.0.0"
