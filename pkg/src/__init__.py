"""
Friedrichs Decay Toolkit
Survival amplitudes, power-law asymptotes and crossover times of N-level Friedrichs models
"""

__version__ = "0.2.0"
