"""
Módulo de Polinomios en q.

Polinomios de una variable con coeficientes enteros de precisión arbitraria;
el índice del coeficiente es la potencia de q.
"""

import json
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

from .errors import DomainError
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

Number = Union[int, float, Fraction]


class QPolynomial:
    """Polinomio Σ_k a_k q^k con a_k enteros."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[int] = ()):
        terms = [int(c) for c in coefficients]
        while terms and terms[-1] == 0:
            terms.pop()
        self.coefficients: Tuple[int, ...] = tuple(terms)

    @classmethod
    def monomial(cls, power: int, coefficient: int = 1) -> "QPolynomial":
        return cls([0] * power + [coefficient])

    @classmethod
    def q_integer(cls, k: int) -> "QPolynomial":
        """[k]_q = 1 + q + ⋯ + q^{k−1}."""
        return cls([1] * k)

    def __hash__(self):
        return hash(self.coefficients)

    def __eq__(self, other):
        if isinstance(other, QPolynomial):
            return self.coefficients == other.coefficients
        if isinstance(other, int):
            return self.coefficients == QPolynomial([other]).coefficients
        return NotImplemented

    def __repr__(self):
        return f"QPolynomial({list(self.coefficients)!r})"

    def __str__(self):
        if not self.coefficients:
            return "0"
        parts = []
        for power, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if power == 0:
                parts.append(str(c))
            else:
                factor = "q" if power == 1 else f"q^{power}"
                parts.append(factor if c == 1 else f"{c}{factor}")
        return " + ".join(parts)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, power: int) -> int:
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]
        return 0

    def __add__(self, other: "QPolynomial") -> "QPolynomial":
        size = max(len(self.coefficients), len(other.coefficients))
        return QPolynomial(self.coefficient(i) + other.coefficient(i) for i in range(size))

    def __mul__(self, other: Union["QPolynomial", int]) -> "QPolynomial":
        if isinstance(other, int):
            return QPolynomial(c * other for c in self.coefficients)
        if not self.coefficients or not other.coefficients:
            return QPolynomial()
        result = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a:
                for j, b in enumerate(other.coefficients):
                    result[i + j] += a * b
        return QPolynomial(result)

    __rmul__ = __mul__

    def evaluate(self, q: Number) -> Number:
        """Evaluar por Horner; con q de tipo Fraction el resultado es exacto."""
        result: Number = 0
        for c in reversed(self.coefficients):
            result = result * q + c
        return result

    def to_json(self) -> str:
        """Arreglo JSON de coeficientes como cadenas decimales (sin pérdida para enteros grandes)."""
        return json.dumps([str(c) for c in self.coefficients])

    @classmethod
    def from_json(cls, text: str) -> "QPolynomial":
        data = json.loads(text)
        if not isinstance(data, list):
            logger.error("Se esperaba un arreglo JSON de coeficientes")
            raise DomainError("Se esperaba un arreglo JSON de coeficientes")
        return cls(int(c) for c in data)


def merge_counts(histograms: Iterable[List[int]]) -> List[int]:
    """Sumar histogramas coeficiente a coeficiente, en el orden recibido."""
    merged: List[int] = []
    for histogram in histograms:
        if len(histogram) > len(merged):
            merged.extend([0] * (len(histogram) - len(merged)))
        for k, count in enumerate(histogram):
            merged[k] += count
    return merged
