"""
Módulo de Excepciones.

Jerarquía de errores compartida por los módulos de cálculo y la interfaz de
línea de comandos.
"""


class MallowsError(Exception):
    """Error base de la aplicación."""


class DomainError(MallowsError, ValueError):
    """Argumento fuera de su dominio (q, palabras de Lehmer, soportes, rejillas)."""


class ResourceLimitError(MallowsError):
    """Se superó una de las guardas de recursos (n, N, longitud de patrón)."""


class VerificationError(MallowsError):
    """Una o más comprobaciones de la suite de verificación fallaron."""
