"""
Módulo de Permutaciones y Patrones.

Este módulo proporciona la representación de permutaciones en notación de una
línea, el conteo de inversiones, la detección de patrones de longitud tres,
la biyección de Lehmer que sustenta la construcción en línea y la enumeración
determinista de S_n.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DomainError, ResourceLimitError
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

MAX_ENUMERATE_N = 14
MAX_GENERIC_PATTERN_LENGTH = 4


@dataclass(frozen=True)
class Permutation:
    """Permutación de [n] en notación de una línea (valores 1..n)."""
    word: Tuple[int, ...]

    def __post_init__(self):
        word = tuple(int(v) for v in self.word)
        if sorted(word) != list(range(1, len(word) + 1)):
            logger.error(f"No es una permutación de [{len(word)}]: {word}")
            raise DomainError(f"No es una permutación de [{len(word)}]: {word}")
        object.__setattr__(self, "word", word)

    @classmethod
    def _trusted(cls, word: Sequence[int]) -> "Permutation":
        # Solo para palabras que ya son biyecciones por construcción.
        perm = object.__new__(cls)
        object.__setattr__(perm, "word", tuple(word))
        return perm

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls._trusted(range(1, n + 1))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """
        Interpretar una permutación desde texto.

        Acepta cadenas de dígitos sin separador ("3214", solo n ≤ 9) y enteros
        separados por espacios o comas ("10 2 3 ...").

        Args:
            text (str): Texto a interpretar

        Returns:
            Permutation: Permutación validada
        """
        text = text.strip()
        if not text:
            return cls(())
        if any(sep in text for sep in (" ", ",", "\t")):
            tokens = [tok for tok in text.replace(",", " ").split() if tok]
        else:
            tokens = list(text)
        try:
            return cls(tuple(int(tok) for tok in tokens))
        except ValueError as e:
            logger.error(f"Permutación mal formada: '{text}'")
            raise DomainError(f"Permutación mal formada: '{text}'") from e

    @property
    def n(self) -> int:
        return len(self.word)

    def __len__(self) -> int:
        return len(self.word)

    def __iter__(self):
        return iter(self.word)

    def __str__(self) -> str:
        if self.n <= 9:
            return "".join(str(v) for v in self.word)
        return " ".join(str(v) for v in self.word)


class PatternTag(str, Enum):
    """Los seis patrones de S_3."""
    P123 = "123"
    P132 = "132"
    P213 = "213"
    P231 = "231"
    P312 = "312"
    P321 = "321"

    def reversed(self) -> "PatternTag":
        return PatternTag(self.value[::-1])

    def inverted(self) -> "PatternTag":
        return PatternTag(str(inverse(Permutation.parse(self.value))))


@dataclass(frozen=True)
class Pattern:
    """
    Patrón a evitar: uno de los seis de S_3 o un patrón genérico corto.

    Los patrones genéricos (longitud distinta de 3, o pasados como permutación
    arbitraria) solo se comprueban con el verificador ingenuo.
    """
    perm: Permutation

    def __post_init__(self):
        if self.perm.n < 2:
            logger.error("Un patrón debe tener longitud ≥ 2")
            raise DomainError("Un patrón debe tener longitud ≥ 2")
        if self.tag is None and self.perm.n > MAX_GENERIC_PATTERN_LENGTH:
            logger.error(f"Patrón genérico de longitud {self.perm.n} rechazado")
            raise ResourceLimitError(
                f"Patrones genéricos limitados a longitud ≤ {MAX_GENERIC_PATTERN_LENGTH}"
            )

    @classmethod
    def of(cls, value: Union["Pattern", PatternTag, Permutation, str]) -> "Pattern":
        if isinstance(value, Pattern):
            return value
        if isinstance(value, PatternTag):
            return cls(Permutation.parse(value.value))
        if isinstance(value, Permutation):
            return cls(value)
        return cls(Permutation.parse(str(value)))

    @property
    def tag(self) -> Optional[PatternTag]:
        try:
            return PatternTag(str(self.perm))
        except ValueError:
            return None

    @property
    def length(self) -> int:
        return self.perm.n

    def reversed(self) -> "Pattern":
        return Pattern(reverse(self.perm))

    def inverted(self) -> "Pattern":
        return Pattern(inverse(self.perm))

    def __str__(self) -> str:
        return str(self.perm)


PatternLike = Union[Pattern, PatternTag, Permutation, str]


@dataclass(frozen=True)
class LehmerWord:
    """Vector de desplazamientos (x_1, ..., x_n) con 0 ≤ x_j ≤ j−1."""
    x: Tuple[int, ...]

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        for j, value in enumerate(x, start=1):
            if not 0 <= value <= j - 1:
                logger.error(f"Entrada x_{j}={value} fuera de [0, {j - 1}]")
                raise DomainError(f"Entrada x_{j}={value} fuera de [0, {j - 1}]")
        object.__setattr__(self, "x", x)

    def __len__(self) -> int:
        return len(self.x)

    def total(self) -> int:
        return sum(self.x)


def inversions(p: Union[Permutation, Sequence[int]]) -> int:
    """
    Contar inversiones, |{(i,j): i<j, p_i > p_j}|, por ordenamiento por mezcla.

    Args:
        p: Permutación o secuencia de valores distintos

    Returns:
        int: Número de inversiones
    """
    values = list(p.word if isinstance(p, Permutation) else p)
    return _merge_count(values)[1]


def _merge_count(values: List[int]) -> Tuple[List[int], int]:
    if len(values) <= 1:
        return values, 0
    middle = len(values) // 2
    left, a = _merge_count(values[:middle])
    right, b = _merge_count(values[middle:])
    merged = []
    count = a + b
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def reverse(p: Permutation) -> Permutation:
    """Permutación inversa en posiciones: σ_n ⋯ σ_1."""
    return Permutation._trusted(p.word[::-1])


def inverse(p: Permutation) -> Permutation:
    """Inversa funcional de la permutación."""
    result = [0] * p.n
    for position, value in enumerate(p.word, start=1):
        result[value - 1] = position
    return Permutation._trusted(result)


def complement(p: Permutation) -> Permutation:
    """Complemento de valores: σ_i ↦ n+1−σ_i."""
    return Permutation._trusted(p.n + 1 - v for v in p.word)


def _has_132(values: Sequence[int]) -> bool:
    # Barrido desde la derecha con pila; `third` es el mejor candidato a "2".
    third = -math.inf
    stack: List[int] = []
    for value in reversed(values):
        if value < third:
            return True
        while stack and stack[-1] < value:
            third = stack.pop()
        stack.append(value)
    return False


def _has_123(values: Sequence[int]) -> bool:
    lowest = math.inf
    middle = math.inf
    for value in values:
        if value > middle:
            return True
        if value > lowest:
            middle = min(middle, value)
        else:
            lowest = value
    return False


def _contains_s3(values: Sequence[int], tag: PatternTag) -> bool:
    if tag is PatternTag.P123:
        return _has_123(values)
    if tag is PatternTag.P321:
        return _has_123([-v for v in values])
    if tag is PatternTag.P132:
        return _has_132(values)
    if tag is PatternTag.P231:
        return _has_132(values[::-1])
    if tag is PatternTag.P312:
        return _has_132([-v for v in values])
    return _has_132([-v for v in reversed(values)])  # 213


def _standardize(values: Sequence[int]) -> Tuple[int, ...]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for rank, index in enumerate(order, start=1):
        ranks[index] = rank
    return tuple(ranks)


def split_positions(p: Permutation, n1: int) -> Tuple[Permutation, Permutation]:
    """
    Patrones de las posiciones [n1] y de las posiciones restantes.

    Para σ = 32451 y n1 = 2 se obtiene (21, 231).

    Args:
        p (Permutation): Permutación de longitud n
        n1 (int): Corte, 0 ≤ n1 ≤ n

    Returns:
        Tuple[Permutation, Permutation]: (σ_{I_1}, σ_{I_2})
    """
    if not 0 <= n1 <= p.n:
        logger.error(f"Corte n1={n1} fuera de [0, {p.n}]")
        raise DomainError(f"Corte n1={n1} fuera de [0, {p.n}]")
    return (Permutation._trusted(_standardize(p.word[:n1])),
            Permutation._trusted(_standardize(p.word[n1:])))


def naive_contains(p: Union[Permutation, Sequence[int]], pattern: PatternLike) -> bool:
    """
    Verificador ingenuo: prueba cada subsecuencia de índices de la longitud del patrón.

    Args:
        p: Permutación o secuencia de valores distintos
        pattern: Patrón a buscar

    Returns:
        bool: True si alguna subsecuencia es orden-isomorfa al patrón
    """
    pattern = Pattern.of(pattern)
    values = list(p.word if isinstance(p, Permutation) else p)
    target = pattern.perm.word
    for indices in itertools.combinations(range(len(values)), len(target)):
        if _standardize([values[i] for i in indices]) == target:
            return True
    return False


def contains_values(values: Sequence[int], pattern: PatternLike) -> bool:
    """Como `contains`, sobre una secuencia cruda de valores distintos."""
    pattern = Pattern.of(pattern)
    if pattern.length > len(values):
        return False
    tag = pattern.tag
    if tag is None:
        return naive_contains(values, pattern)
    return _contains_s3(values, tag)


def contains(p: Permutation, pattern: PatternLike) -> bool:
    """
    Determinar si la permutación contiene el patrón.

    Los seis patrones de S_3 usan barridos lineales; los genéricos usan el
    verificador ingenuo. Un patrón más largo que la permutación nunca aparece.

    Args:
        p (Permutation): Permutación a examinar
        pattern: Patrón (etiqueta, texto, permutación o Pattern)

    Returns:
        bool: True si p contiene el patrón
    """
    return contains_values(p.word, pattern)


def avoids(p: Permutation, pattern: PatternLike) -> bool:
    return not contains_values(p.word, pattern)


def lehmer_decode(x: Union[LehmerWord, Sequence[int]]) -> Permutation:
    """
    Construir la permutación colocando j con x_j números a su derecha.

    Args:
        x: Palabra de Lehmer (se valida si llega como secuencia)

    Returns:
        Permutation: Permutación resultante de la construcción en línea
    """
    word = x if isinstance(x, LehmerWord) else LehmerWord(tuple(x))
    return Permutation._trusted(_decode_values(word.x))


def _decode_values(x: Sequence[int]) -> List[int]:
    placed: List[int] = []
    for j, displacement in enumerate(x, start=1):
        placed.insert(len(placed) - int(displacement), j)
    return placed


def lehmer_encode(p: Permutation) -> LehmerWord:
    """
    Inversa de `lehmer_decode`: x_j es la cantidad de valores menores que j a su derecha.

    Args:
        p (Permutation): Permutación a codificar

    Returns:
        LehmerWord: Palabra de desplazamientos
    """
    position = [0] * (p.n + 1)
    for index, value in enumerate(p.word):
        position[value] = index
    x = []
    for j in range(1, p.n + 1):
        x.append(sum(1 for i in range(1, j) if position[i] > position[j]))
    return LehmerWord(tuple(x))


def unrank_permutation(rank: int, n: int) -> List[int]:
    """Permutación de rango `rank` en el orden lexicográfico de S_n (sistema factorial)."""
    available = list(range(1, n + 1))
    result = []
    for size in range(n, 0, -1):
        block = math.factorial(size - 1)
        index, rank = divmod(rank, block)
        result.append(available.pop(index))
    return result


def _next_permutation(values: List[int]) -> bool:
    i = len(values) - 2
    while i >= 0 and values[i] > values[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(values) - 1
    while values[j] < values[i]:
        j -= 1
    values[i], values[j] = values[j], values[i]
    values[i + 1:] = reversed(values[i + 1:])
    return True


def block_bounds(n: int, blocks: int) -> List[Tuple[int, int]]:
    """
    Partir los rangos lexicográficos [0, n!) en bloques contiguos.

    Args:
        n (int): Longitud de las permutaciones
        blocks (int): Número de bloques (≥ 1)

    Returns:
        List[Tuple[int, int]]: Pares (inicio, fin) semiabiertos, en orden
    """
    if blocks < 1:
        logger.error("El número de bloques debe ser ≥ 1")
        raise DomainError("El número de bloques debe ser ≥ 1")
    total = math.factorial(n)
    return [(total * b // blocks, total * (b + 1) // blocks) for b in range(blocks)]


def enumerate_permutations(n: int, block: int = 0, blocks: int = 1) -> Iterator[Permutation]:
    """
    Enumerar S_n en orden lexicográfico, opcionalmente solo un bloque contiguo.

    La concatenación de los bloques 0..blocks−1 es exactamente el orden
    lexicográfico completo, de modo que consumidores en paralelo cubren S_n
    una sola vez.

    Args:
        n (int): Longitud, 0 ≤ n ≤ 14
        block (int): Índice del bloque a producir
        blocks (int): Número total de bloques

    Yields:
        Permutation: Cada permutación del bloque
    """
    if n < 0:
        logger.error("n debe ser ≥ 0")
        raise DomainError("n debe ser ≥ 0")
    if n > MAX_ENUMERATE_N:
        logger.error(f"Enumeración rechazada: n={n} supera el límite {MAX_ENUMERATE_N}")
        raise ResourceLimitError(f"enumerate admite n ≤ {MAX_ENUMERATE_N}, recibido n={n}")
    if not 0 <= block < blocks:
        logger.error(f"Bloque {block} fuera de [0, {blocks})")
        raise DomainError(f"Bloque {block} fuera de [0, {blocks})")
    start, stop = block_bounds(n, blocks)[block]
    if start == stop:
        return
    values = unrank_permutation(start, n)
    for _ in range(stop - start):
        yield Permutation._trusted(values)
        if not _next_permutation(values):
            break
