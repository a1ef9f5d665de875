"""Núcleo de cálculo: permutaciones, Mallows(q), motor exacto, cotas y Monte Carlo."""
