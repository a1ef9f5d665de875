"""
mallowsAvoid - Probabilidad de evitar patrones bajo la distribución de Mallows.

Este paquete calcula, acota, muestrea y verifica la probabilidad de que una
permutación con ley Mallows(q) evite un patrón de longitud tres.
"""

__version__ = "1.0.0"
