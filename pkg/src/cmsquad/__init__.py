"""Canonical representations and Chebyshev-Markov-Stieltjes extremal functions."""
