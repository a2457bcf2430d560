"""Monodromy of Riemann equations: realizability, witnesses, numerical continuation."""
