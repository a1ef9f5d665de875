"""
Módulo de la Distribución de Mallows.

Este módulo implementa el modelo Mallows(q) sobre S_n: constante de
normalización, función de probabilidad, las marginales geométricas truncadas
de la construcción en línea y el muestreador correspondiente.

Para q > 1 se aplica la dualidad P_n^q(σ) = P_n^{1/q}(σ^rev); q = 1 es el caso
uniforme.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError
from .permutations import (
    Permutation, _decode_values, inversions, reverse,
)
from .qpolynomial import QPolynomial
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

Number = Union[float, Fraction]

RNG_ID = "numpy.PCG64"
MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class MallowsParam:
    """
    Parámetro q del modelo.

    El núcleo de cálculo trabaja con q ∈ (0,1); `core_q` aplica la reducción
    por dualidad cuando q > 1.
    """
    q: Number

    def __post_init__(self):
        if isinstance(self.q, float) and not math.isfinite(self.q):
            logger.error(f"q debe ser finito, recibido {self.q}")
            raise DomainError(f"q debe ser finito, recibido {self.q}")
        if self.q <= 0:
            logger.error(f"q debe ser estrictamente positivo, recibido {self.q}")
            raise DomainError(f"q debe ser estrictamente positivo, recibido {self.q}")

    @property
    def is_uniform(self) -> bool:
        return self.q == 1

    @property
    def is_dual(self) -> bool:
        return self.q > 1

    @property
    def core_q(self) -> Number:
        return 1 / self.q if self.is_dual else self.q


def require_unit_interval(q: Number, name: str = "q") -> Number:
    """Validar q ∈ (0,1), el dominio del núcleo de cálculo."""
    if not 0 < q < 1:
        logger.error(f"{name}={q} fuera de (0,1)")
        raise DomainError(f"{name} debe estar en (0,1), recibido {q}")
    return q


@dataclass
class SamplerState:
    """
    Estado del generador pseudoaleatorio (numpy PCG64 sembrado con 64 bits).

    La división para trabajo en paralelo es determinista: el hijo k de un estado
    raíz es `SeedSequence(seed).spawn(k_total)[k]`, y los nietos cuelgan de la
    clave de su padre, así que nunca repiten el flujo de un hermano.
    """
    seed: int = 0
    seed_sequence: np.random.SeedSequence = None
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < MAX_SEED:
            logger.error(f"La semilla debe estar en [0, 2^64), recibida {self.seed}")
            raise DomainError(f"La semilla debe estar en [0, 2^64), recibida {self.seed}")
        if self.seed_sequence is None:
            self.seed_sequence = np.random.SeedSequence(int(self.seed))
        self.rng = np.random.Generator(np.random.PCG64(self.seed_sequence))

    def spawn(self, count: int) -> List["SamplerState"]:
        """
        Derivar estados hijos independientes.

        Args:
            count (int): Número de hijos

        Returns:
            List[SamplerState]: Hijos en orden de índice
        """
        # copia fresca: llamadas repetidas devuelven los mismos hijos
        parent = np.random.SeedSequence(self.seed_sequence.entropy,
                                         spawn_key=self.seed_sequence.spawn_key)
        return [SamplerState(seed=self.seed, seed_sequence=child) for child in parent.spawn(count)]


def normalizer(n: int, q: Number) -> Number:
    """
    Constante Z_n(q) = ∏_{k=1}^n (1−q^k)/(1−q) = Σ_σ q^{inv(σ)}.

    Args:
        n (int): Longitud, n ≥ 0
        q: Parámetro positivo (Fraction da un resultado exacto)

    Returns:
        Number: Z_n(q); n! cuando q = 1
    """
    if n < 0:
        logger.error("n debe ser ≥ 0")
        raise DomainError("n debe ser ≥ 0")
    MallowsParam(q)
    if q == 1:
        return math.factorial(n)
    result = 1
    for k in range(1, n + 1):
        result = result * (1 - q ** k) / (1 - q)
    return result


def normalizer_polynomial(n: int) -> QPolynomial:
    """Forma exacta de Z_n: ∏_{k=1}^n [k]_q como polinomio de coeficientes enteros."""
    poly = QPolynomial([1])
    for k in range(1, n + 1):
        poly = poly * QPolynomial.q_integer(k)
    return poly


def log_normalizer(n: int, q: float) -> float:
    """log Z_n(q) para q ∈ (0,1), sin desbordamiento para n grande."""
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(np.log(-np.expm1(k * math.log(q)))) - n * math.log1p(-q))


def pmf(p: Permutation, q: Number) -> Number:
    """
    Probabilidad P_n^q(σ) = q^{inv(σ)} / Z_n(q).

    Args:
        p (Permutation): Permutación
        q: Parámetro positivo; q > 1 se reduce por dualidad

    Returns:
        Number: Probabilidad (exacta si q es Fraction)
    """
    param = MallowsParam(q)
    if param.is_dual:
        return pmf(reverse(p), param.core_q)
    if param.is_uniform:
        return Fraction(1, math.factorial(p.n)) if isinstance(q, Fraction) else 1 / math.factorial(p.n)
    return q ** inversions(p) / normalizer(p.n, q)


def truncated_geometric_pmf(j: int, m: int, q: Number) -> Number:
    """
    P(X_j = m) = (1−q) q^m / (1−q^j), soporte {0, ..., j−1}.

    Args:
        j (int): Índice, j ≥ 1
        m (int): Valor, 0 ≤ m ≤ j−1
        q: Parámetro positivo

    Returns:
        Number: Probabilidad
    """
    if j < 1:
        logger.error(f"j debe ser ≥ 1, recibido {j}")
        raise DomainError(f"j debe ser ≥ 1, recibido {j}")
    if not 0 <= m <= j - 1:
        logger.error(f"m={m} fuera del soporte [0, {j - 1}]")
        raise DomainError(f"m={m} fuera del soporte [0, {j - 1}]")
    MallowsParam(q)
    if q == 1:
        return Fraction(1, j) if isinstance(q, Fraction) else 1 / j
    return (1 - q) * q ** m / (1 - q ** j)


def _inverse_cdf(u: np.ndarray, j: np.ndarray, q: float) -> np.ndarray:
    # m = ⌊log(1 − U(1−q^j)) / log q⌋, acotado a [0, j−1]
    log_q = math.log(q)
    mass = -np.expm1(j * log_q)
    m = np.floor(np.log1p(-u * mass) / log_q)
    return np.clip(m, 0, j - 1).astype(np.int64)


def sample_truncated_geometric(j: int, q: float, state: SamplerState) -> int:
    """
    Extraer X_j por CDF inversa a partir de un único uniforme.

    Args:
        j (int): Índice, j ≥ 1
        q (float): Parámetro positivo
        state (SamplerState): Estado del generador

    Returns:
        int: Valor en [0, j−1]
    """
    if j < 1:
        logger.error(f"j debe ser ≥ 1, recibido {j}")
        raise DomainError(f"j debe ser ≥ 1, recibido {j}")
    param = MallowsParam(q)
    u = state.rng.random()
    if param.is_uniform:
        return min(int(u * j), j - 1)
    value = int(_inverse_cdf(np.array([u]), np.array([j]), float(param.core_q))[0])
    return j - 1 - value if param.is_dual else value


def sample_lehmer_words(n: int, q: float, size: int, state: SamplerState) -> np.ndarray:
    """
    Extraer `size` palabras (X_1, ..., X_n) independientes de una vez.

    Args:
        n (int): Longitud
        q (float): Parámetro en (0,1)
        size (int): Número de palabras
        state (SamplerState): Estado del generador

    Returns:
        np.ndarray: Matriz entera (size, n); la fila i es una palabra de Lehmer
    """
    require_unit_interval(q)
    u = state.rng.random((size, n))
    return _inverse_cdf(u, np.arange(1, n + 1), float(q))


def sample_permutations(n: int, q: float, size: int, state: SamplerState) -> List[Permutation]:
    """
    Extraer `size` permutaciones con ley P_n^q.

    q = 1 usa barajado uniforme; q > 1 muestrea con 1/q e invierte el orden.

    Args:
        n (int): Longitud, n ≥ 1
        q (float): Parámetro positivo
        size (int): Número de muestras
        state (SamplerState): Estado del generador

    Returns:
        List[Permutation]: Muestras en orden de extracción
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    param = MallowsParam(q)
    if param.is_uniform:
        return [Permutation._trusted((state.rng.permutation(n) + 1).tolist()) for _ in range(size)]
    words = sample_lehmer_words(n, float(param.core_q), size, state)
    samples = [Permutation._trusted(_decode_values(row)) for row in words.tolist()]
    if param.is_dual:
        samples = [reverse(p) for p in samples]
    return samples


def sample_permutation(n: int, q: float, state: SamplerState) -> Permutation:
    """Extraer una permutación con ley P_n^q mediante la construcción en línea."""
    return sample_permutations(n, q, 1, state)[0]


def identity_probability(n: int, q: Number) -> Number:
    """
    P_n^q(id) = (1−q)^n / ∏_{j=1}^n (1−q^j).

    Args:
        n (int): Longitud, n ≥ 1
        q: Parámetro en (0,1)

    Returns:
        Number: Probabilidad de la identidad
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    require_unit_interval(q)
    result = (1 - q) ** n
    for j in range(1, n + 1):
        result = result / (1 - q ** j)
    return result


def lehmer_word_probability(x: Sequence[int], q: Number) -> Number:
    """Probabilidad de la palabra x en la construcción: ∏_j P(X_j = x_j)."""
    result = 1
    for j, value in enumerate(x, start=1):
        result = result * truncated_geometric_pmf(j, int(value), q)
    return result


def expected_inversions(n: int, q: float) -> float:
    """
    E[inv(σ)] = Σ_j E[X_j], con E[X_j] = q/(1−q) − j q^j/(1−q^j).

    q = 1 da n(n−1)/4; q > 1 usa la dualidad inv(σ^rev) = n(n−1)/2 − inv(σ).
    """
    param = MallowsParam(q)
    if param.is_uniform:
        return n * (n - 1) / 4
    if param.is_dual:
        return n * (n - 1) / 2 - expected_inversions(n, param.core_q)
    return sum(q / (1 - q) - j * q ** j / (1 - q ** j) for j in range(1, n + 1))


def inversion_statistics(samples: Iterable[Permutation]) -> Tuple[float, float]:
    """
    Media y varianza muestral de inv(σ).

    Args:
        samples: Permutaciones muestreadas

    Returns:
        Tuple[float, float]: (media, varianza con denominador n−1)
    """
    values = np.array([inversions(p) for p in samples], dtype=float)
    if values.size == 0:
        logger.error("Se requiere al menos una muestra")
        raise DomainError("Se requiere al menos una muestra")
    variance = float(values.var(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), variance

