"""Certification of anticyclotomic Hilbert-tenth hypotheses for p-congruent elliptic curves."""

__version__ = "0.1.0"
