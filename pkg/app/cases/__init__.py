"""Test cases: manufactured solution, Kidder shell, oscillating cylinders, free stream, error metrics."""
