"""
Módulo de Función Generadora y Cotas.

Este módulo implementa la función generadora G_q(t) = Σ γ_n t^n, las
condiciones iteradas con F(x) = 1/(1−x) que certifican de qué lado del valor
(1−q)/c queda el límite L(q) = lim (P_n^q(S_n(312)))^{1/n}, las cotas en forma
cerrada, el bisector que reproduce la tabla de valores y los límites de
referencia para 123 y 132/213.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DomainError, MallowsError
from .exact_engine import gamma_seq
from .mallows import require_unit_interval
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

# F(x) = +∞ también cuando x queda a menos de esta distancia de 1 por debajo
F_TOLERANCE = 1e-15
DEFAULT_DEPTH_CAP = 2 ** 16
START_DEPTH = 8
TAIL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ExtendedReal:
    """Real finito no negativo o el valor simbólico +∞."""
    value: float
    infinite: bool = False

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def __str__(self) -> str:
        return "+inf" if self.infinite else repr(self.value)


INFINITY = ExtendedReal(math.inf, infinite=True)


def F_extended(x: float) -> ExtendedReal:
    """
    F(x) = 1/(1−x) en [0,1) y +∞ en el resto de ℝ.

    Args:
        x (float): Argumento

    Returns:
        ExtendedReal: Valor finito o +∞
    """
    if math.isnan(x) or x < 0 or x >= 1 - F_TOLERANCE:
        return INFINITY
    return ExtendedReal(1 / (1 - x))


def _run_chain(c: float, q: float, first: ExtendedReal, top: int) -> ExtendedReal:
    # Aplica y ← F(c q^k y) para k = top..0 partiendo de `first`.
    y = first
    for k in range(top, -1, -1):
        if y.infinite:
            return INFINITY
        y = F_extended(c * q ** k * y.value)
    return y


def _check_chain_args(c: float, q: float, N: int, min_depth: int, c_max_inclusive: bool):
    require_unit_interval(q)
    if N < min_depth:
        logger.error(f"N debe ser ≥ {min_depth}, recibido {N}")
        raise DomainError(f"N debe ser ≥ {min_depth}, recibido {N}")
    if not (0 < c <= 1 if c_max_inclusive else 0 < c < 1):
        logger.error(f"c={c} fuera de su dominio")
        raise DomainError(f"c={c} fuera de su dominio")


def iterated_lower_condition(c: float, q: float, N: int) -> ExtendedReal:
    """
    Evaluar F(cF(cq ⋯ F(cq^{N−1}(1+cq^N)) ⋯ )).

    +∞ certifica L(q) > (1−q)/c.

    Args:
        c (float): Parámetro en (0,1]
        q (float): Parámetro en (0,1)
        N (int): Profundidad, N ≥ 1

    Returns:
        ExtendedReal: Resultado de la cadena
    """
    _check_chain_args(c, q, N, 1, True)
    innermost = F_extended(c * q ** (N - 1) * (1 + c * q ** N))
    return _run_chain(c, q, innermost, N - 2)


def iterated_lower_condition_no_tail(c: float, q: float, N: int) -> ExtendedReal:
    """
    Variante sin cola: F(cF(cq ⋯ cq^{N−2}F(cq^{N−1}) ⋯ )).

    Su término más interno es menor, por lo que +∞ aquí implica +∞ en
    `iterated_lower_condition` con el mismo N.

    Args:
        c (float): Parámetro en (0,1]
        q (float): Parámetro en (0,1)
        N (int): Profundidad, N ≥ 2

    Returns:
        ExtendedReal: Resultado de la cadena
    """
    _check_chain_args(c, q, N, 2, True)
    innermost = F_extended(c * q ** (N - 1))
    return _run_chain(c, q, innermost, N - 2)


def iterated_upper_condition(c: float, q: float, N: int) -> ExtendedReal:
    """
    Evaluar F(cF(cq ⋯ F(cq^{N−1}F(cq^N/(1−q))) ⋯ )).

    Un resultado finito certifica L(q) < (1−q)/c.

    Args:
        c (float): Parámetro en (0,1)
        q (float): Parámetro en (0,1)
        N (int): Profundidad, N ≥ 1

    Returns:
        ExtendedReal: Resultado de la cadena
    """
    _check_chain_args(c, q, N, 1, False)
    innermost = F_extended(c * q ** N / (1 - q))
    return _run_chain(c, q, innermost, N - 1)


def G_truncated(t: float, q: float, N: int) -> float:
    """
    Suma parcial Σ_{n=0}^N γ_n t^n de la función generadora.

    Args:
        t (float): Punto, t ≥ 0
        q (float): Parámetro en (0,1)
        N (int): Último término

    Returns:
        float: Suma parcial
    """
    return math.fsum(gamma_seq(N, q, scale=t))


def truncation_length(t: float, tol: float = TAIL_TOLERANCE) -> int:
    """
    Menor N con t^N/(1−t) < tol; como γ_n ≤ 1 acota la cola de G en t.

    Args:
        t (float): Punto en [0,1)
        tol (float): Tolerancia de la cola

    Returns:
        int: Número de términos
    """
    if not 0 <= t < 1:
        logger.error(f"La cota de cola requiere t ∈ [0,1), recibido {t}")
        raise DomainError(f"La cota de cola requiere t ∈ [0,1), recibido {t}")
    if t == 0:
        return 1
    return max(1, int(math.ceil(math.log(tol * (1 - t)) / math.log(t))))


def functional_equation_residual(t: float, q: float, N: int) -> float:
    """
    |G_N(t)(1 − (1−q) t G_N(qt)) − 1| para la truncación G_N.

    Args:
        t (float): Punto dentro del disco de convergencia certificado
        q (float): Parámetro en (0,1)
        N (int): Términos de la truncación

    Returns:
        float: Residuo
    """
    g_t = G_truncated(t, q, N)
    g_qt = G_truncated(q * t, q, N)
    return abs(g_t * (1 - (1 - q) * t * g_qt) - 1)


@dataclass(frozen=True)
class DivergenceWitness:
    """Sumas parciales de G en t, crecientes, y el primer N que supera el umbral."""
    t: float
    threshold: float
    terms_needed: Optional[int]
    final_partial_sum: float

    @property
    def exceeded(self) -> bool:
        return self.terms_needed is not None


def divergence_witness(q: float, t: float, threshold: float = 1e3,
                       max_terms: int = 10 ** 5) -> DivergenceWitness:
    """
    Testigo numérico de que G_q(t) → ∞ al acercarse al radio de convergencia.

    Args:
        q (float): Parámetro en (0,1)
        t (float): Punto de evaluación (típicamente justo debajo de 1/lo)
        threshold (float): Umbral a superar
        max_terms (int): Número máximo de términos

    Returns:
        DivergenceWitness: Resultado del testigo
    """
    partial = np.cumsum(gamma_seq(max_terms, q, scale=t))
    above = np.nonzero(partial > threshold)[0]
    terms_needed = int(above[0]) if above.size else None
    logger.debug(f"Testigo de divergencia q={q}, t={t}: N={terms_needed}, suma final={partial[-1]:.6g}")
    return DivergenceWitness(t=t, threshold=threshold, terms_needed=terms_needed,
                             final_partial_sum=float(partial[-1]))


def _discriminant(value: float, label: str) -> float:
    if value < 0:
        logger.error(f"Discriminante negativo en {label}: {value}")
        raise MallowsError(f"Discriminante negativo en {label} ({value}): error de implementación")
    return value


def closed_form_bounds(q: float) -> Tuple[float, float]:
    """
    Cotas explícitas LB(q) < L(q) < UB(q) para 312 y 231.

    Se evalúan en la forma racionalizada LB = (A + √(A² − B))/2 con A = 1−q⁴,
    B = 4q²(1−q)(1−q³), y UB = (1 + √(1 − 4(1−q)q²(q²+1)))/2, algebraicamente
    idénticas a las fracciones originales y sin cancelación para q pequeño.

    Args:
        q (float): Parámetro en (0,1)

    Returns:
        Tuple[float, float]: (LB, UB)
    """
    require_unit_interval(q)
    a = 1 - q ** 4
    b = 4 * q ** 2 * (1 - q) * (1 - q ** 3)
    lb = (a + math.sqrt(_discriminant(a * a - b, "LB"))) / 2
    ub = (1 + math.sqrt(_discriminant(1 - 4 * (1 - q) * q ** 2 * (q ** 2 + 1), "UB"))) / 2
    return lb, ub


def lower_quadratic(c: float, q: float) -> float:
    """(q²+q³+q⁴)c² − (1+q+q²+q³)c + 1; ≤ 0 equivale a la condición sin cola con N=4."""
    return (q ** 2 + q ** 3 + q ** 4) * c ** 2 - (1 + q + q ** 2 + q ** 3) * c + 1


def upper_quadratic(c: float, q: float) -> float:
    """(q²+q⁴)c² − c + 1 − q; > 0 equivale a la condición superior con N=3."""
    return (q ** 2 + q ** 4) * c ** 2 - c + 1 - q


def lower_threshold_candidates(q: float) -> Tuple[float, float, float]:
    """
    Los tres umbrales en c que disparan la condición sin cola con N=4.

    Args:
        q (float): Parámetro en (0,1)

    Returns:
        Tuple[float, float, float]: (1/(1+q), umbral del segundo paso, raíz de la cuadrática)
    """
    require_unit_interval(q)
    s = 1 + q + q ** 2
    second = (s - math.sqrt(_discriminant(s * s - 4 * q ** 2, "segundo umbral"))) / (2 * q ** 2)
    a = 1 - q ** 4
    third = (a - math.sqrt(_discriminant(a * a - 4 * q ** 2 * (1 - q) * (1 - q ** 3), "LB"))) / (2 * q ** 2 * (1 - q ** 3))
    return 1 / (1 + q), second, third


def lower_threshold(q: float) -> float:
    """Menor c con la condición sin cola N=4 infinita; (1−q)/c es LB(q)."""
    return min(lower_threshold_candidates(q))


def upper_threshold(q: float) -> float:
    """Supremo de los c con la condición superior N=3 finita; (1−q)/c es UB(q)."""
    require_unit_interval(q)
    disc = _discriminant(1 - 4 * q ** 2 * (1 - q) * (1 + q ** 2), "UB")
    return (1 - math.sqrt(disc)) / (2 * q ** 2 * (1 + q ** 2))


def bisect_transition(is_infinite: Callable[[float], bool], lo: float = 1e-12,
                      hi: float = 1 - 1e-12, tol: float = 1e-13) -> float:
    """
    Localizar por bisección el c donde una condición pasa de finita a infinita.

    Args:
        is_infinite (Callable[[float], bool]): Condición evaluada en c
        lo (float): Extremo donde la condición es finita
        hi (float): Extremo donde la condición es infinita
        tol (float): Ancho final del intervalo

    Returns:
        float: Punto medio del intervalo final
    """
    if is_infinite(lo) or not is_infinite(hi):
        logger.error("La condición no cambia de finita a infinita en el intervalo dado")
        raise DomainError("La condición no cambia de finita a infinita en el intervalo dado")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if is_infinite(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def hugo_upper_bound(q: float) -> float:
    """Cota 4(1−q); solo es informativa para q > 3/4."""
    require_unit_interval(q)
    return 4 * (1 - q)


def depth_schedule(depth_cap: int = DEFAULT_DEPTH_CAP, start: int = START_DEPTH) -> List[int]:
    """Profundidades N = 8, 16, 32, ... hasta depth_cap (incluido si no es potencia)."""
    if depth_cap < 1:
        logger.error(f"depth_cap debe ser ≥ 1, recibido {depth_cap}")
        raise DomainError(f"depth_cap debe ser ≥ 1, recibido {depth_cap}")
    schedule = []
    depth = min(start, depth_cap)
    while depth < depth_cap:
        schedule.append(depth)
        depth *= 2
    schedule.append(depth_cap)
    return schedule


@dataclass(frozen=True)
class LimitInterval:
    """Intervalo certificado para L(q) = lim (P_n^q(S_n(312)))^{1/n}."""
    q: float
    lo: float
    hi: float
    depth_used: int
    flagged: bool
    steps: int

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def certify(c: float, q: float, depth_cap: int = DEFAULT_DEPTH_CAP) -> Tuple[Optional[str], int]:
    """
    Intentar certificar de qué lado de (1−q)/c está L(q), escalando N.

    Args:
        c (float): Candidato en (0,1)
        q (float): Parámetro en (0,1)
        depth_cap (int): Profundidad máxima

    Returns:
        Tuple[Optional[str], int]: ("above" si L > (1−q)/c, "below" si L < (1−q)/c,
        None si ninguna condición se cumple) y la profundidad alcanzada
    """
    depth = 0
    for depth in depth_schedule(depth_cap):
        if iterated_lower_condition(c, q, depth).infinite:
            return "above", depth
        if iterated_upper_condition(c, q, depth).is_finite:
            return "below", depth
    return None, depth


def limit_312(q: float, eps: float = 0.01, depth_cap: int = DEFAULT_DEPTH_CAP) -> LimitInterval:
    """
    Intervalo de ancho ≤ eps para L(q) por bisección con certificados.

    El intervalo inicial es [LB(q), min(UB(q), 4(1−q))]. En cada paso se toma
    el punto medio v, c = (1−q)/v, y se escala N hasta que la condición
    inferior sea infinita (L > v) o la superior finita (L < v). Si ninguna se
    cumple en depth_cap el último intervalo certificado se devuelve marcado.

    Args:
        q (float): Parámetro en (0,1)
        eps (float): Ancho objetivo, > 0
        depth_cap (int): Profundidad máxima de la cadena

    Returns:
        LimitInterval: Intervalo, profundidad usada y marca de no convergencia
    """
    require_unit_interval(q)
    if eps <= 0:
        logger.error(f"eps debe ser > 0, recibido {eps}")
        raise DomainError(f"eps debe ser > 0, recibido {eps}")
    lb, ub = closed_form_bounds(q)
    lo, hi = lb, min(ub, hugo_upper_bound(q))
    depth_used = 0
    steps = 0
    flagged = False
    while hi - lo > eps:
        mid = (lo + hi) / 2
        side, depth = certify((1 - q) / mid, q, depth_cap)
        depth_used = max(depth_used, depth)
        steps += 1
        logger.debug(f"q={q}: paso {steps}, v={mid:.6f}, resultado={side}, N={depth}")
        if side == "above":
            lo = mid
        elif side == "below":
            hi = mid
        else:
            flagged = True
            logger.warning(f"q={q}: sin certificado en v={mid:.6f} con N={depth_cap}; intervalo [{lo:.6f}, {hi:.6f}] marcado")
            break
    return LimitInterval(q=q, lo=lo, hi=hi, depth_used=depth_used, flagged=flagged, steps=steps)


@dataclass(frozen=True)
class BoundReport:
    """Fila de cotas para un q: formas cerradas, cota 4(1−q) e intervalo bisecado."""
    q: float
    lb_closed: float
    ub_closed: float
    hugo: float
    interval: LimitInterval = field(repr=False)

    @property
    def depth_used(self) -> int:
        return self.interval.depth_used

    @property
    def flagged(self) -> bool:
        return self.interval.flagged

    def as_row(self) -> dict:
        return {
            "q": self.q,
            "LB": self.lb_closed,
            "UB": self.ub_closed,
            "hugo": self.hugo,
            "bisect_lo": self.interval.lo,
            "bisect_hi": self.interval.hi,
            "depth_used": self.depth_used,
            "flagged": self.flagged,
        }


def bound_report(q: float, eps: float = 0.01, depth_cap: int = DEFAULT_DEPTH_CAP) -> BoundReport:
    """Construir la fila de cotas completa para un q."""
    lb, ub = closed_form_bounds(q)
    return BoundReport(q=q, lb_closed=lb, ub_closed=ub, hugo=hugo_upper_bound(q),
                       interval=limit_312(q, eps, depth_cap))


def exponent_123(q: float) -> float:
    """lim (P_n^q(S_n(123)))^{1/n²} = q^{1/4}."""
    require_unit_interval(q)
    return q ** 0.25


def limit_132(q: float) -> float:
    """lim (P_n^q(S_n(τ)))^{1/n} = 1−q para τ = 132 y τ = 213."""
    require_unit_interval(q)
    return 1 - q
