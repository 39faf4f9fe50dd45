"""
halfpack - dynamic first-fit packing of 1-items and 2-items on the half-axis

Simulates the continuous-time chain where items of size 1 and 2 arrive at
rates p1 r and p2 r, are placed first-fit on the integer lattice, and depart
after unit-mean exponential lifetimes; measures how the packing approaches
its optimal limit as r grows.

Example usage:
    halfpack simulate --r 500 --seed 7 --horizon 50
    halfpack sweep --config configs/sweep.conf --seed 1
    halfpack replay results/trace.csv
    halfpack snapshot results/snapshots/t010.txt
"""

__version__ = "0.1.0"
