"""Double-sequence CFO estimation lab for receivers with few-bit ADCs.

Generates synchronization waveforms (Zadoff-Chu baseline, auxiliary pair,
sum-difference pair), pushes them through a beamformed multipath link with
coarse ADC models, runs the matching estimators, and evaluates everything
against closed-form variance predictions and the 1-bit Fisher bound.
"""

__version__ = "0.1.0"
