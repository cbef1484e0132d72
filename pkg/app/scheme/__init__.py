"""Numerical scheme: reconstruction, predictor, mesh motion, fluxes, boundary ghosts, time stepping."""
