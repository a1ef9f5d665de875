"""
Módulo de Reales en Escala Logarítmica.

Números reales no negativos almacenados como su logaritmo natural; −∞
representa el cero. Evita el desbordamiento inferior en las recurrencias de
d_n, que puede ser del orden de (1−q)^n.
"""

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)


@dataclass(frozen=True, order=True)
class LogReal:
    """Real no negativo x representado por log(x)."""
    logval: float

    @classmethod
    def from_float(cls, value: float) -> "LogReal":
        if value < 0 or math.isnan(value):
            logger.error(f"LogReal solo representa valores ≥ 0, recibido {value}")
            raise DomainError(f"LogReal solo representa valores ≥ 0, recibido {value}")
        return cls(-math.inf if value == 0 else math.log(value))

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0)

    @property
    def is_zero(self) -> bool:
        return self.logval == -math.inf

    def __float__(self) -> float:
        return math.exp(self.logval)

    def to_float(self) -> float:
        return math.exp(self.logval)

    def __add__(self, other: "LogReal") -> "LogReal":
        return LogReal(float(np.logaddexp(self.logval, other.logval)))

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.is_zero or other.is_zero:
            return LogReal.zero()
        return LogReal(self.logval + other.logval)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.is_zero:
            raise ZeroDivisionError("División de LogReal por cero")
        if self.is_zero:
            return self
        return LogReal(self.logval - other.logval)

    def __pow__(self, exponent: float) -> "LogReal":
        if self.is_zero:
            return self if exponent > 0 else LogReal.one()
        return LogReal(self.logval * exponent)

    def __repr__(self):
        return f"LogReal(logval={self.logval!r})"


def log_sum(values: Iterable[LogReal]) -> LogReal:
    """Suma estable (log-sum-exp) de una colección de LogReal; la suma vacía es cero."""
    logs = [v.logval for v in values]
    if not logs:
        return LogReal.zero()
    return LogReal(float(logsumexp(logs)))
