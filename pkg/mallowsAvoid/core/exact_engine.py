"""
Módulo del Motor Exacto.

Probabilidades exactas de evitar un patrón bajo Mallows(q):

- oráculo por fuerza bruta (polinomio numerador Σ_{σ evita τ} q^{inv(σ)});
- recurrencias para 312/231 y 213/132 en escala logarítmica y en racionales;
- la sucesión γ_n = w_n d_n(312) y su versión escalada γ_n t^n;
- la maquinaria de X monótonas y las cotas para n finito del patrón 123.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ResourceLimitError
from .logreal import LogReal
from .mallows import (
    MallowsParam, Number, log_normalizer, normalizer, normalizer_polynomial,
    pmf, require_unit_interval, truncated_geometric_pmf,
)
from .permutations import (
    Pattern, PatternLike, PatternTag, Permutation, contains_values,
    enumerate_permutations, inversions, split_positions,
)
from .qpolynomial import QPolynomial, merge_counts
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

MAX_BRUTE_FORCE_N = 12
MAX_TREE_N = 14
MAX_EXACT_RECURRENCE_N = 30
MAX_MONOTONE_INDEX = 10 ** 4
GAMMA_CUTOFF = 1e-20

# Patrones con recurrencia: primera forma (peso q^{k−1}) y segunda (q^{(n−k+1)(k−1)})
FIRST_FORM = (PatternTag.P312, PatternTag.P231)
SECOND_FORM = (PatternTag.P213, PatternTag.P132)


def catalan(n: int) -> int:
    """Número de Catalan C_n = binom(2n, n)/(n+1)."""
    return math.comb(2 * n, n) // (n + 1)


@dataclass(frozen=True)
class AvoidanceCount:
    """Resultado del oráculo: numerador exacto de P_n^q(S_n(τ))."""
    n: int
    pattern: Pattern
    numerator: QPolynomial

    @property
    def count(self) -> int:
        """|S_n(τ)|, el numerador evaluado en q = 1."""
        return self.numerator.evaluate(1)

    def probability(self, q: Number) -> Number:
        """
        Evaluar numerador(q) / Z_n(q).

        Args:
            q: Parámetro positivo; con Fraction el resultado es exacto

        Returns:
            Number: P_n^q(S_n(τ))
        """
        MallowsParam(q)
        denominator = normalizer_polynomial(self.n).evaluate(q)
        if isinstance(q, (Fraction, int)):
            return Fraction(self.numerator.evaluate(q)) / denominator
        return self.numerator.evaluate(q) / denominator


def _histogram_block(n: int, pattern: Pattern, block: int, blocks: int) -> List[int]:
    histogram = [0] * (n * (n - 1) // 2 + 1)
    for perm in enumerate_permutations(n, block, blocks):
        if not contains_values(perm.word, pattern):
            histogram[inversions(perm)] += 1
    return histogram


def _histogram_tree(n: int, pattern: Pattern) -> List[int]:
    # Insertar el valor j con x elementos a su derecha agrega x inversiones;
    # contener τ es hereditario al borrar el máximo, así que basta podar.
    histogram = [0] * (n * (n - 1) // 2 + 1)

    def grow(word: List[int], inv: int):
        j = len(word) + 1
        if j > n:
            histogram[inv] += 1
            return
        for x in range(j):
            child = word[:len(word) - x] + [j] + word[len(word) - x:]
            if not contains_values(child, pattern):
                grow(child, inv + x)

    grow([], 0)
    return histogram


def brute_force_avoidance(n: int, pattern: PatternLike, method: str = "tree",
                          workers: int = 1) -> AvoidanceCount:
    """
    Oráculo exacto: Σ_{σ ∈ S_n, σ evita τ} q^{inv(σ)} como polinomio en q.

    Args:
        n (int): Longitud (≤ 12 con "full", ≤ 14 con "tree")
        pattern: Patrón, cualquiera de los seis de S_3 o genérico corto
        method (str): "tree" (árbol de inserción podado) o "full" (S_n completo por bloques)
        workers (int): Hilos para el método "full"; el resultado no depende de este valor.
            Con el GIL los bloques se reparten pero no corren en paralelo

    Returns:
        AvoidanceCount: Numerador exacto y evaluación en cualquier q
    """
    pattern = Pattern.of(pattern)
    if n < 0:
        logger.error("n debe ser ≥ 0")
        raise DomainError("n debe ser ≥ 0")
    if method == "full":
        if n > MAX_BRUTE_FORCE_N:
            logger.error(f"Fuerza bruta rechazada: n={n} > {MAX_BRUTE_FORCE_N}")
            raise ResourceLimitError(f"La fuerza bruta completa admite n ≤ {MAX_BRUTE_FORCE_N}")
        blocks = max(1, workers) * 4
        logger.debug(f"Fuerza bruta completa: n={n}, patrón={pattern}, {blocks} bloques, {workers} hilo(s)")
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            histograms = list(pool.map(
                lambda b: _histogram_block(n, pattern, b, blocks), range(blocks)
            ))
        histogram = merge_counts(histograms)
    elif method == "tree":
        if n > MAX_TREE_N:
            logger.error(f"Árbol de inserción rechazado: n={n} > {MAX_TREE_N}")
            raise ResourceLimitError(f"El árbol de inserción admite n ≤ {MAX_TREE_N}")
        histogram = _histogram_tree(n, pattern)
    else:
        logger.error(f"Método desconocido: '{method}'")
        raise DomainError(f"Método desconocido: '{method}'")
    result = AvoidanceCount(n=n, pattern=pattern, numerator=QPolynomial(histogram))
    logger.debug(f"Oráculo n={n}, patrón={pattern}: |S_n(τ)|={result.count}")
    return result


def w_seq(N: int, q: Number) -> List[Number]:
    """
    w_n = ∏_{l=1}^n (1−q^l) para n = 0..N, con w_0 = 1.

    Args:
        N (int): Último índice
        q: Parámetro en (0,1)

    Returns:
        List[Number]: w_0, ..., w_N
    """
    require_unit_interval(q)
    values: List[Number] = [1]
    for l in range(1, N + 1):
        values.append(values[-1] * (1 - q ** l))
    return values


def log_w_table(N: int, q: float) -> np.ndarray:
    """log w_0, ..., log w_N calculados de forma acumulada."""
    require_unit_interval(q)
    l = np.arange(1, N + 1, dtype=float)
    return np.concatenate(([0.0], np.cumsum(np.log(-np.expm1(l * math.log(q))))))


def _recurrence_form(pattern: PatternLike) -> PatternTag:
    tag = Pattern.of(pattern).tag
    if tag not in FIRST_FORM + SECOND_FORM:
        logger.error(f"La recurrencia solo existe para 312, 231, 213 y 132 (recibido {pattern})")
        raise DomainError(f"La recurrencia solo existe para 312, 231, 213 y 132 (recibido {pattern})")
    return tag


@dataclass(frozen=True)
class AvoidanceSeries:
    """Sucesión d_n = P_n^q(S_n(τ)), n = 0..N, guardada como log d_n."""
    pattern: PatternTag
    q: float
    log_d: np.ndarray

    @property
    def N(self) -> int:
        return len(self.log_d) - 1

    def __getitem__(self, n: int) -> LogReal:
        return LogReal(float(self.log_d[n]))

    @property
    def d(self) -> List[LogReal]:
        """d_1, ..., d_N como LogReal."""
        return [LogReal(float(v)) for v in self.log_d[1:]]

    def probability(self, n: int) -> float:
        return math.exp(self.log_d[n])

    def root(self, n: int) -> float:
        """d_n^{1/n}."""
        return math.exp(self.log_d[n] / n)

    def rows(self) -> Iterator[Tuple[int, float, float, float]]:
        """Filas (n, d_n, log d_n, d_n^{1/n}) para n = 1..N."""
        for n in range(1, self.N + 1):
            yield n, self.probability(n), float(self.log_d[n]), self.root(n)


def avoidance_recurrence(N: int, q: float, pattern: PatternLike) -> AvoidanceSeries:
    """
    Calcular d_1..d_N por la recurrencia en escala logarítmica, costo O(N²).

    d_n = (1−q) Σ_{k=1}^n ω(n,k) (w_{k−1} w_{n−k}/w_n) d_{k−1} d_{n−k}, con
    ω = q^{k−1} para 312/231 y ω = q^{(n−k+1)(k−1)} para 213/132. Si q > 1 se
    usa la dualidad: se calcula con 1/q y el patrón invertido.

    Args:
        N (int): Último índice
        q (float): Parámetro positivo distinto de 1
        pattern: 312, 231, 213 o 132

    Returns:
        AvoidanceSeries: Serie con d_0 = 1
    """
    tag = _recurrence_form(pattern)
    param = MallowsParam(q)
    if param.is_dual:
        logger.info(f"q={q} > 1: se usa q'={1 / q} con el patrón {tag.reversed().value}")
        return avoidance_recurrence(N, 1 / q, tag.reversed())
    require_unit_interval(q)
    q = float(q)
    log_q = math.log(q)
    log_one_minus_q = math.log1p(-q)
    lw = log_w_table(N, q)
    ld = np.zeros(N + 1)
    second_form = tag in SECOND_FORM
    for n in range(1, N + 1):
        k = np.arange(1, n + 1, dtype=float)
        if second_form:
            weight = (n - k + 1) * (k - 1) * log_q
        else:
            weight = (k - 1) * log_q
        terms = (log_one_minus_q + weight + lw[:n] + lw[n - 1::-1] - lw[n]
                 + ld[:n] + ld[n - 1::-1])
        # probabilidad: log d_n ≤ 0
        ld[n] = min(float(logsumexp(terms)), 0.0)
    logger.debug(f"Recurrencia {tag.value}: N={N}, q={q}, log d_N={ld[N]:.6g}")
    return AvoidanceSeries(pattern=tag, q=q, log_d=ld)


def avoidance_recurrence_exact(N: int, q: Union[Fraction, str, float],
                               pattern: PatternLike) -> List[Fraction]:
    """
    Variante racional exacta de la recurrencia (N ≤ 30).

    Args:
        N (int): Último índice
        q: Racional en (0,1) (Fraction, texto "a/b" o flotante convertido exactamente)
        pattern: 312, 231, 213 o 132

    Returns:
        List[Fraction]: d_0, ..., d_N
    """
    if N > MAX_EXACT_RECURRENCE_N:
        logger.error(f"Recurrencia exacta rechazada: N={N} > {MAX_EXACT_RECURRENCE_N}")
        raise ResourceLimitError(f"La recurrencia racional admite N ≤ {MAX_EXACT_RECURRENCE_N}")
    tag = _recurrence_form(pattern)
    q = Fraction(q)
    require_unit_interval(q)
    w = w_seq(N, q)
    d = [Fraction(1)]
    for n in range(1, N + 1):
        total = Fraction(0)
        for k in range(1, n + 1):
            power = (n - k + 1) * (k - 1) if tag in SECOND_FORM else k - 1
            total += q ** power * w[k - 1] * w[n - k] / w[n] * d[k - 1] * d[n - k]
        d.append((1 - q) * total)
    return d


def gamma_seq(N: int, q: float, scale: float = 1.0) -> np.ndarray:
    """
    γ_n t^n para n = 0..N con t = `scale`, por γ_n = (1−q) Σ_k q^{k−1} γ_{k−1} γ_{n−k}.

    Los términos con q^{k−1} < 1e−20 se omiten: no alteran un doble.

    Args:
        N (int): Último índice
        q (float): Parámetro en (0,1)
        scale (float): t ≥ 0; con t = 1 se obtiene γ_n

    Returns:
        np.ndarray: γ_0 t^0, ..., γ_N t^N
    """
    require_unit_interval(q)
    if scale < 0:
        logger.error(f"t debe ser ≥ 0, recibido {scale}")
        raise DomainError(f"t debe ser ≥ 0, recibido {scale}")
    q = float(q)
    cutoff = max(1, int(math.ceil(math.log(GAMMA_CUTOFF) / math.log(q))) + 1)
    powers = q ** np.arange(min(cutoff, N + 1), dtype=float)
    factor = (1 - q) * scale
    beta = np.zeros(N + 1)
    beta[0] = 1.0
    for n in range(1, N + 1):
        kk = min(n, len(powers))
        beta[n] = factor * np.dot(powers[:kk] * beta[:kk], beta[n - kk:n][::-1])
    return beta


def monotone_X_probability(indices: Sequence[int], q: Number) -> Number:
    """
    P(X_{i_1} < X_{i_2} < ⋯ < X_{i_m}) para geométricas truncadas independientes.

    Programación dinámica sobre (posición, último valor), costo O(m · i_m).

    Args:
        indices: i_1 < ⋯ < i_m, todos ≥ 1 (i_m ≤ 10⁴)
        q: Parámetro en (0,1); con Fraction el resultado es exacto

    Returns:
        Number: Probabilidad
    """
    indices = [int(i) for i in indices]
    if not indices:
        logger.error("Se requiere al menos un índice")
        raise DomainError("Se requiere al menos un índice")
    if indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
        logger.error(f"Los índices deben ser ≥ 1 y estrictamente crecientes: {indices}")
        raise DomainError(f"Los índices deben ser ≥ 1 y estrictamente crecientes: {indices}")
    if indices[-1] > MAX_MONOTONE_INDEX:
        logger.error(f"i_m admite hasta {MAX_MONOTONE_INDEX}")
        raise ResourceLimitError(f"i_m admite hasta {MAX_MONOTONE_INDEX}")
    require_unit_interval(q)
    first = indices[0]
    law = [truncated_geometric_pmf(first, v, q) for v in range(first)]
    for index in indices[1:]:
        below = 0
        new_law = []
        for v in range(index):
            new_law.append(truncated_geometric_pmf(index, v, q) * below)
            if v < len(law):
                below += law[v]
        law = new_law
    return sum(law)


def monotone_X_bounds(m: int, q: Number) -> Tuple[Number, Number]:
    """
    Cotas uniformes en los índices para P(X_{i_1} < ⋯ < X_{i_m}).

    Args:
        m (int): Número de índices, m ≥ 1
        q: Parámetro en (0,1)

    Returns:
        Tuple[Number, Number]: (w_m q^{m(m−1)/2}/Z_m, q^{m(m−1)/2}/(Z_m w_m))
    """
    if m < 1:
        logger.error(f"m debe ser ≥ 1, recibido {m}")
        raise DomainError(f"m debe ser ≥ 1, recibido {m}")
    require_unit_interval(q)
    w_m = w_seq(m, q)[-1]
    core = q ** (m * (m - 1) // 2) / normalizer(m, q)
    return w_m * core, core / w_m


def _log_Z_table(n: int, q: float) -> np.ndarray:
    return np.array([log_normalizer(k, q) for k in range(n + 1)])


def log_lower_bound_123(n: int, q: float) -> float:
    """
    log de la cota inferior para P_n^q(S_n(123)), maximizada sobre m ∈ [n].

    Args:
        n (int): Longitud, n ≥ 1
        q (float): Parámetro en (0,1)

    Returns:
        float: log de la cota
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    require_unit_interval(q)
    lw = log_w_table(n, q)
    log_z = _log_Z_table(n, q)
    m = np.arange(1, n + 1)
    exponent = ((m - 1) * m + (n - m - 1) * (n - m)) / 2
    terms = lw[n - m] - log_z[n - m] - log_z[m] + exponent * math.log(q)
    return float(np.max(terms))


def lower_bound_123(n: int, q: float) -> float:
    """Cota inferior para P_n^q(S_n(123)) (puede ser subnormal para n grande)."""
    return math.exp(log_lower_bound_123(n, q))


def exponent_123_estimate(n: int, q: float) -> float:
    """(lower_bound_123(n, q))^{1/n²}, calculado en escala logarítmica."""
    return math.exp(log_lower_bound_123(n, q) / n ** 2)


def fixed_point_count_law(n: int, q: float) -> np.ndarray:
    """
    Ley de |A_n| = #{j ≤ n : X_j = j−1} (suma de Bernoulli independientes).

    Args:
        n (int): Longitud
        q (float): Parámetro en (0,1)

    Returns:
        np.ndarray: P(|A_n| = k) para k = 0..n
    """
    require_unit_interval(q)
    law = np.zeros(n + 1)
    law[0] = 1.0
    for j in range(1, n + 1):
        p = truncated_geometric_pmf(j, j - 1, q)
        shifted = np.concatenate(([0.0], law[:-1]))
        law = (1 - p) * law + p * shifted
    return law


def sum_bounds_123(n: int, q: float) -> Tuple[float, float]:
    """
    Cotas en forma de suma para P_n^q(S_n(123)) usando la ley exacta de |A_n|.

    Σ_k P(|A_n|=k) · w_{n−k}^{±1} q^{(n−k−1)(n−k)/2} / Z_{n−k}; con el signo +
    se obtiene la cota inferior y con − la superior. La cota inferior nunca es
    menor que `lower_bound_123`.

    Args:
        n (int): Longitud, n ≥ 1
        q (float): Parámetro en (0,1)

    Returns:
        Tuple[float, float]: (inferior, superior)
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    law = fixed_point_count_law(n, q)
    lw = log_w_table(n, q)
    log_z = _log_Z_table(n, q)
    k = np.arange(1, n + 1)
    s = n - k
    core = (s - 1) * s / 2 * math.log(q) - log_z[s]
    with np.errstate(divide="ignore"):
        log_law = np.log(law[1:])
    lower = float(np.exp(logsumexp(log_law + core + lw[s])))
    upper = float(np.exp(logsumexp(log_law + core - lw[s])))
    return lower, upper


def log_uniform_asymptotic(n: int) -> float:
    """log de (4e)^n / (√2 π n^{n+2})."""
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    return n * math.log(4 * math.e) - 0.5 * math.log(2) - math.log(math.pi) - (n + 2) * math.log(n)


def uniform_asymptotic(n: int) -> float:
    """Asintótica de C_n/n!, la probabilidad uniforme de evitar un patrón de S_3."""
    return math.exp(log_uniform_asymptotic(n))


def uniform_avoidance_probability(n: int) -> Fraction:
    """Valor exacto C_n/n!."""
    return Fraction(catalan(n), math.factorial(n))


def exact_probability(n: int, q: Number, pattern: PatternLike,
                      method: str = "tree") -> Number:
    """Atajo: P_n^q(S_n(τ)) por el oráculo."""
    return brute_force_avoidance(n, pattern, method=method).probability(q)


def projection_law(n1: int, n2: int, q: Number) -> Dict[Tuple[Permutation, Permutation], Number]:
    """
    Ley conjunta exacta de (σ_{I_1}, σ_{I_2}) con I_1 = [n1] bajo P_{n1+n2}^q.

    Si σ ~ P_{n1+n2}^q, cada parte sigue P_{n_i}^q y las dos son independientes;
    con q Fraction la comprobación es exacta.

    Args:
        n1 (int): Longitud del primer bloque de posiciones
        n2 (int): Longitud del segundo bloque
        q: Parámetro positivo

    Returns:
        Dict: Probabilidad de cada par de patrones
    """
    if n1 < 0 or n2 < 0:
        logger.error("Las longitudes de los bloques deben ser ≥ 0")
        raise DomainError("Las longitudes de los bloques deben ser ≥ 0")
    law: Dict[Tuple[Permutation, Permutation], Number] = {}
    for perm in enumerate_permutations(n1 + n2):
        key = split_positions(perm, n1)
        law[key] = law.get(key, 0) + pmf(perm, q)
    return law
