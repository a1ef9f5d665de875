"""
Módulo de Monte Carlo.

Estimación con semilla de P_n^q(S_n(τ)) (la única herramienta cuantitativa
para el patrón 321) y validación estadística del muestreador.

Las muestras se reparten en `workers` fragmentos; el fragmento k usa el hijo k
de `SeedSequence(seed).spawn(workers)`, así que el resultado depende de
(seed, samples, workers) y de nada más. Los hilos fijan el reparto y el orden
de la suma, no aceleran: el barrido es Python puro y comparte el GIL.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from .errors import DomainError, ResourceLimitError
from .mallows import (
    RNG_ID, MallowsParam, SamplerState, pmf, sample_lehmer_words,
    sample_permutations,
)
from .permutations import Pattern, PatternLike, contains_values, lehmer_decode, lehmer_encode
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

Z_95 = 1.96
RARE_HITS = 10
CHUNK_SIZE = 10_000
MAX_DISTRIBUTION_N = 6


@dataclass(frozen=True)
class Estimate:
    """Estimación binomial de una probabilidad de evitar un patrón."""
    n: int
    q: float
    pattern: str
    mean: float
    stderr: float
    samples: int
    seed: int
    hits: int
    workers: int
    ci95: Tuple[float, float]
    flagged_rare: bool
    rng_id: str = RNG_ID

    def to_json(self) -> Dict:
        data = asdict(self)
        data["ci95"] = list(self.ci95)
        return data


def binomial_estimate(hits: int, samples: int) -> Tuple[float, float, Tuple[float, float]]:
    """
    Media, error estándar e intervalo normal al 95% recortado a [0,1].

    Args:
        hits (int): Éxitos observados
        samples (int): Número de muestras, ≥ 1

    Returns:
        Tuple[float, float, Tuple[float, float]]: (media, error estándar, IC95)
    """
    if samples < 1:
        logger.error(f"samples debe ser ≥ 1, recibido {samples}")
        raise DomainError(f"samples debe ser ≥ 1, recibido {samples}")
    mean = hits / samples
    stderr = math.sqrt(mean * (1 - mean) / samples)
    ci95 = (max(0.0, mean - Z_95 * stderr), min(1.0, mean + Z_95 * stderr))
    return mean, stderr, ci95


def shard_sizes(samples: int, workers: int) -> List[int]:
    """Reparto de las muestras: el resto va a los primeros fragmentos."""
    if workers < 1:
        logger.error(f"workers debe ser ≥ 1, recibido {workers}")
        raise DomainError(f"workers debe ser ≥ 1, recibido {workers}")
    base, extra = divmod(samples, workers)
    return [base + (1 if k < extra else 0) for k in range(workers)]


def _count_avoiders(n: int, q: float, pattern: Pattern, size: int, state: SamplerState) -> int:
    hits = 0
    remaining = size
    while remaining > 0:
        chunk = min(CHUNK_SIZE, remaining)
        for p in sample_permutations(n, q, chunk, state):
            if not contains_values(p.word, pattern):
                hits += 1
        remaining -= chunk
    return hits


def estimate_avoidance(n: int, q: float, pattern: PatternLike, samples: int,
                       seed: int = 0, workers: int = 1) -> Estimate:
    """
    Estimar P_n^q(S_n(τ)) con muestras independientes de Mallows(q).

    Args:
        n (int): Longitud, n ≥ 1
        q (float): Parámetro positivo
        pattern: Cualquiera de los seis patrones de S_3 o un patrón genérico corto
        samples (int): Número de muestras, ≥ 1
        seed (int): Semilla de 64 bits
        workers (int): Número de fragmentos (y de hilos)

    Returns:
        Estimate: Estimación con IC95 y marca de evento raro
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    if samples < 1:
        logger.error(f"samples debe ser ≥ 1, recibido {samples}")
        raise DomainError(f"samples debe ser ≥ 1, recibido {samples}")
    MallowsParam(q)
    pattern = Pattern.of(pattern)
    sizes = shard_sizes(samples, workers)
    children = SamplerState(seed=seed).spawn(workers)
    logger.info(f"Estimando P_{n}^{q}(S_n({pattern})) con {samples} muestras, semilla {seed}, {workers} fragmento(s)")
    if workers == 1:
        counts = [_count_avoiders(n, q, pattern, sizes[0], children[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(_count_avoiders, n, q, pattern, size, child)
                for size, child in zip(sizes, children)
            ]
            counts = [f.result() for f in futures]
    hits = sum(counts)
    mean, stderr, ci95 = binomial_estimate(hits, samples)
    flagged = hits < RARE_HITS
    if flagged:
        logger.warning(f"Solo {hits} aciertos en {samples} muestras: estimación poco fiable")
    logger.info(f"Estimación: {mean:.6g} ± {stderr:.2g}")
    return Estimate(n=n, q=float(q), pattern=str(pattern), mean=mean, stderr=stderr,
                    samples=samples, seed=int(seed), hits=hits, workers=workers,
                    ci95=ci95, flagged_rare=flagged)


def word_index(words: np.ndarray) -> np.ndarray:
    """Índice en base mixta Σ_j x_j (j−1)! de cada fila (palabras de Lehmer)."""
    n = words.shape[1]
    radix = np.array([math.factorial(j) for j in range(n)], dtype=np.int64)
    return words.astype(np.int64) @ radix


def _exact_word_law(n: int, q: float) -> np.ndarray:
    # Probabilidad exacta de cada palabra, en el orden de `word_index`
    law = np.zeros(math.factorial(n))
    for index, x in enumerate(_all_words(n)):
        law[index] = float(pmf(lehmer_decode(x), q))
    return law


def _all_words(n: int) -> List[Tuple[int, ...]]:
    words = [()]
    for j in range(1, n + 1):
        words = [w + (v,) for v in range(j) for w in words]
    return words


def empirical_distribution_check(n: int, q: float, samples: int, seed: int = 0) -> float:
    """
    Distancia de variación total entre la ley empírica del muestreador y P_n^q.

    Args:
        n (int): Longitud, 1 ≤ n ≤ 6
        q (float): Parámetro positivo
        samples (int): Número de muestras
        seed (int): Semilla

    Returns:
        float: ½ Σ_σ |frecuencia(σ) − P_n^q(σ)|
    """
    if n < 1:
        logger.error(f"n debe ser ≥ 1, recibido {n}")
        raise DomainError(f"n debe ser ≥ 1, recibido {n}")
    if n > MAX_DISTRIBUTION_N:
        logger.error(f"La comprobación de distribución admite n ≤ {MAX_DISTRIBUTION_N}")
        raise ResourceLimitError(f"La comprobación de distribución admite n ≤ {MAX_DISTRIBUTION_N}")
    if samples < 1:
        logger.error(f"samples debe ser ≥ 1, recibido {samples}")
        raise DomainError(f"samples debe ser ≥ 1, recibido {samples}")
    param = MallowsParam(q)
    state = SamplerState(seed=seed)
    if 0 < q < 1:
        words = sample_lehmer_words(n, float(q), samples, state)
    else:
        perms = sample_permutations(n, q, samples, state)
        words = np.array([lehmer_encode(p).x for p in perms], dtype=np.int64)
    counts = np.bincount(word_index(words), minlength=math.factorial(n))
    empirical = counts / samples
    exact = _exact_word_law(n, float(param.q))
    tv = 0.5 * float(np.abs(empirical - exact).sum())
    logger.info(f"Distancia TV en S_{n} con q={q} y {samples} muestras: {tv:.6g}")
    return tv
