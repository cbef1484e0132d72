"""ALE-SBM: high-order direct ALE finite volume solver for the 2D Euler equations with shifted boundary correction."""
