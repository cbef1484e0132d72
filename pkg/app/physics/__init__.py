"""Gas dynamics: equation of state, fluxes, ALE eigenstructure."""
