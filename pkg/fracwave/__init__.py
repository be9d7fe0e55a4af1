"""Petrov-Galerkin solver for the time-fractional wave equation with nonsmooth data."""
