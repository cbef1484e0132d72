"""Analytic descriptions of the true (curved, moving) boundary."""
