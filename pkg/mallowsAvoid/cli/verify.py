"""
Suite de Verificación.

Ejecuta las comprobaciones de invariantes de todos los módulos de cálculo y
produce un manifiesto aprobado/fallido. Los tamaños están elegidos para que la
suite completa termine en pocos minutos en una máquina de escritorio.
"""

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from ..core import exact_engine as ee
from ..core import genfunc_bounds as gb
from ..core.errors import VerificationError
from ..core.mallows import SamplerState, pmf, sample_lehmer_words
from ..core.montecarlo import empirical_distribution_check, estimate_avoidance
from ..core.permutations import (
    LehmerWord, Permutation, PatternTag, contains, enumerate_permutations,
    inverse, inversions, lehmer_decode, lehmer_encode, reverse,
)
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

CheckOutcome = Tuple[bool, str]

RECURRENCE_TAGS = ee.FIRST_FORM + ee.SECOND_FORM
SWEEP_Q = (0.3, 0.5, 0.7)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class VerificationReport:
    """Resultados de la suite en el orden en que se ejecutaron."""
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def manifest(self) -> List[str]:
        return [
            f"[{'OK' if r.passed else 'FALLO'}] {r.name} ({r.seconds:.2f} s): {r.detail}"
            for r in self.results
        ]


def _check_perm_examples() -> CheckOutcome:
    cases = [
        inversions(Permutation.parse("3214")) == 3,
        inversions(Permutation.parse("321")) == 3,
        not contains(Permutation.parse("53412"), "123"),
        contains(Permutation.parse("51324"), "123"),
        not any(contains(Permutation.parse("21"), t) for t in PatternTag),
        reverse(Permutation.parse("3214")) == Permutation.parse("4123"),
        inverse(Permutation.parse("231")) == Permutation.parse("312"),
        lehmer_decode((0, 1, 2, 0)) == Permutation.parse("3214"),
    ]
    return all(cases), f"{sum(cases)}/{len(cases)} ejemplos correctos"


def _check_symmetries() -> CheckOutcome:
    bad = 0
    for n in range(1, 7):
        for p in enumerate_permutations(n):
            if reverse(reverse(p)) != p or inverse(inverse(p)) != p:
                bad += 1
    tags_ok = all(t.reversed().reversed() == t for t in PatternTag)
    return bad == 0 and tags_ok, f"{bad} involuciones fallidas en n ≤ 6"


def _check_lehmer_bijection() -> CheckOutcome:
    bad = 0
    for n in range(0, 7):
        seen = set()
        for x in itertools.product(*(range(j) for j in range(1, n + 1))):
            p = lehmer_decode(x)
            seen.add(p)
            if lehmer_encode(p) != LehmerWord(x) or inversions(p) != sum(x):
                bad += 1
        if len(seen) != math.factorial(n):
            bad += 1
    return bad == 0, f"{bad} discrepancias en n ≤ 6"


def _check_catalan() -> CheckOutcome:
    wrong = [
        (n, t.value) for n in range(1, 11) for t in PatternTag
        if ee.brute_force_avoidance(n, t).count != ee.catalan(n)
    ]
    return not wrong, "C_n para n ≤ 10 y los seis patrones" if not wrong else f"fallos: {wrong}"


def _check_oracle_equivalence() -> CheckOutcome:
    worst = 0.0
    exact_ok = True
    exact_qs = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    for tag in RECURRENCE_TAGS:
        rationals = {q: ee.avoidance_recurrence_exact(8, q, tag) for q in exact_qs}
        for n in range(1, 9):
            oracle = ee.brute_force_avoidance(n, tag)
            exact_ok &= all(oracle.probability(q) == rationals[q][n] for q in exact_qs)
            for q in (0.25, 0.5, 0.75):
                value = ee.avoidance_recurrence(n, q, tag).probability(n)
                reference = oracle.probability(q)
                worst = max(worst, abs(value - reference) / reference)
    return worst <= 1e-12 and exact_ok, f"error relativo máximo {worst:.2e}, racional exacto={exact_ok}"


def _check_ordering_and_floor() -> CheckOutcome:
    problems = []
    for q in SWEEP_Q:
        series = {t: ee.avoidance_recurrence(50, q, t) for t in RECURRENCE_TAGS}
        for n in range(1, 51):
            if not math.isclose(series[PatternTag.P312].log_d[n], series[PatternTag.P231].log_d[n], rel_tol=1e-12, abs_tol=1e-15):
                problems.append(("312=231", q, n))
            if not math.isclose(series[PatternTag.P213].log_d[n], series[PatternTag.P132].log_d[n], rel_tol=1e-12, abs_tol=1e-15):
                problems.append(("213=132", q, n))
            if n >= 3 and not series[PatternTag.P312].log_d[n] > series[PatternTag.P213].log_d[n]:
                problems.append(("312>213", q, n))
            if any(s.log_d[n] <= n * math.log1p(-q) for s in series.values()):
                problems.append(("piso", q, n))
    return not problems, "n ≤ 50, q ∈ {0.3, 0.5, 0.7}" if not problems else f"fallos: {problems[:5]}"


def _check_submultiplicativity() -> CheckOutcome:
    q = Fraction(1, 2)
    bad = []
    for tag in PatternTag:
        d = [ee.brute_force_avoidance(n, tag).probability(q) for n in range(0, 9)]
        for n1 in range(1, 8):
            for n2 in range(1, 9 - n1):
                if d[n1 + n2] > d[n1] * d[n2]:
                    bad.append((tag.value, n1, n2))
    return not bad, "P_{n1+n2} ≤ P_{n1}·P_{n2} para n1+n2 ≤ 8" if not bad else f"fallos: {bad}"


def _check_projection() -> CheckOutcome:
    q = Fraction(1, 2)
    law = ee.projection_law(2, 3, q)
    ok = all(prob == pmf(first, q) * pmf(second, q) for (first, second), prob in law.items())
    ok &= len(law) == math.factorial(2) * math.factorial(3)
    return ok, "ley conjunta en S_5 = producto de P_2 y P_3 (aritmética racional)"


def _check_gamma() -> CheckOutcome:
    q = 0.5
    gamma = ee.gamma_seq(200, q)
    series = ee.avoidance_recurrence(200, q, PatternTag.P312)
    lw = ee.log_w_table(200, q)
    worst = max(abs(gamma[n] - math.exp(lw[n] + series.log_d[n])) / gamma[n] for n in range(201))
    first = math.isclose(gamma[1], 1 - q) and math.isclose(gamma[2], (1 - q) * (1 - q ** 2))
    return worst <= 1e-12 and first, f"error relativo máximo {worst:.2e}"


def _check_monotone_bounds() -> CheckOutcome:
    bad = 0
    for q in SWEEP_Q:
        for m in range(1, 5):
            lower, upper = ee.monotone_X_bounds(m, q)
            for indices in itertools.combinations(range(1, 9), m):
                value = ee.monotone_X_probability(indices, q)
                if not lower <= value <= upper:
                    bad += 1
    return bad == 0, f"{bad} conjuntos de índices fuera de las cotas"


def _check_123_law() -> CheckOutcome:
    below = [n for n in range(1, 9)
             if ee.brute_force_avoidance(n, "123").probability(0.5) < ee.lower_bound_123(n, 0.5)]
    target = gb.exponent_123(0.5)
    gap16 = abs(ee.exponent_123_estimate(16, 0.5) - target)
    gap64 = abs(ee.exponent_123_estimate(64, 0.5) - target)
    ok = not below and gap64 < 0.05 and gap64 < gap16
    return ok, f"distancia a q^(1/4): n=16 {gap16:.4f}, n=64 {gap64:.4f}"


def _check_132_law() -> CheckOutcome:
    q = 0.5
    series = ee.avoidance_recurrence(4096, q, PatternTag.P213)
    floor = gb.limit_132(q)
    roots = [series.root(n) for n in range(1, 4097)]
    above = all(r >= floor for r in roots)
    gap256 = roots[255] - floor
    gap4096 = roots[4095] - floor
    return above and gap4096 < gap256, f"brecha n=256 {gap256:.4f}, n=4096 {gap4096:.4f}"


def _check_uniform_asymptotic() -> CheckOutcome:
    errors = [abs(ee.uniform_asymptotic(n) / float(ee.uniform_avoidance_probability(n)) - 1)
              for n in (20, 50, 100)]
    ok = errors[1] < 0.05 and errors[0] > errors[1] > errors[2]
    return ok, "errores relativos " + ", ".join(f"{e:.4f}" for e in errors)


def _check_closed_forms() -> CheckOutcome:
    worst = 0.0
    for q in (0.3, 0.5, 0.7):
        lower = gb.bisect_transition(lambda c: gb.iterated_lower_condition_no_tail(c, q, 4).infinite)
        upper = gb.bisect_transition(lambda c: gb.iterated_upper_condition(c, q, 3).infinite)
        worst = max(worst, abs(lower - gb.lower_threshold(q)), abs(upper - gb.upper_threshold(q)))
    return worst <= 1e-10, f"diferencia máxima con las raíces {worst:.2e}"


def _check_table() -> CheckOutcome:
    true_values = {0.6: 0.716, 0.7: 0.605, 0.8: 0.461, 0.9: 0.275}
    missed = []
    for q, value in true_values.items():
        interval = gb.limit_312(q, eps=0.01)
        lb, ub = gb.closed_form_bounds(q)
        if not (interval.contains(value) and not interval.flagged and lb <= interval.lo and interval.hi <= ub):
            missed.append((q, interval.lo, interval.hi))
    return not missed, "valores de la tabla dentro de los intervalos" if not missed else f"fallos: {missed}"


def _check_generating_function() -> CheckOutcome:
    residual = gb.functional_equation_residual(0.5, 0.5, 400)
    interval = gb.limit_312(0.5, eps=1e-3)
    witness = gb.divergence_witness(0.5, (1 - 1e-9) / interval.lo)
    ok = residual < 1e-8 and witness.exceeded
    return ok, f"residuo {residual:.2e}, testigo N={witness.terms_needed}"


def _check_sampler_law() -> CheckOutcome:
    tv = empirical_distribution_check(4, 0.5, 10 ** 6, seed=0)
    words = sample_lehmer_words(8, 0.5, 1000, SamplerState(seed=0))
    first_column_zero = bool((words[:, 0] == 0).all())
    return tv < 0.005 and first_column_zero, f"distancia TV {tv:.5f}"


def _check_monte_carlo() -> CheckOutcome:
    estimate = estimate_avoidance(5, 0.5, "321", 10 ** 5, seed=0)
    exact = ee.exact_probability(5, 0.5, "321")
    ok = abs(estimate.mean - exact) <= 4 * estimate.stderr
    return ok, f"estimación {estimate.mean:.5f} frente a {exact:.5f}"


CHECKS: List[Tuple[str, Callable[[], CheckOutcome]]] = [
    ("ejemplos de permutaciones", _check_perm_examples),
    ("involuciones", _check_symmetries),
    ("biyección de Lehmer", _check_lehmer_bijection),
    ("conteo de Catalan", _check_catalan),
    ("recurrencias frente al oráculo", _check_oracle_equivalence),
    ("orden y piso (1−q)^n", _check_ordering_and_floor),
    ("submultiplicatividad", _check_submultiplicativity),
    ("proyección e independencia", _check_projection),
    ("sucesión γ", _check_gamma),
    ("cotas de X monótonas", _check_monotone_bounds),
    ("ley de 123", _check_123_law),
    ("ley de 132/213", _check_132_law),
    ("asintótica uniforme", _check_uniform_asymptotic),
    ("raíces en forma cerrada", _check_closed_forms),
    ("tabla de valores límite", _check_table),
    ("función generadora", _check_generating_function),
    ("ley del muestreador", _check_sampler_law),
    ("Monte Carlo frente al oráculo", _check_monte_carlo),
]


def run_suite(names: Optional[List[str]] = None, raise_on_failure: bool = False) -> VerificationReport:
    """
    Ejecutar la suite de verificación.

    Args:
        names (Optional[List[str]]): Subconjunto de comprobaciones (por nombre); todas si es None
        raise_on_failure (bool): Lanzar VerificationError si alguna falla

    Returns:
        VerificationReport: Resultados en orden
    """
    report = VerificationReport()
    for name, check in CHECKS:
        if names is not None and name not in names:
            continue
        start = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as e:
            logger.error(f"Comprobación '{name}' lanzó {type(e).__name__}: {str(e)}", exc_info=True)
            passed, detail = False, f"excepción {type(e).__name__}: {str(e)}"
        elapsed = time.perf_counter() - start
        report.results.append(CheckResult(name=name, passed=passed, detail=detail, seconds=elapsed))
        log = logger.info if passed else logger.error
        log(f"{'OK' if passed else 'FALLO'}: {name} ({detail})")
    if raise_on_failure and not report.passed:
        raise VerificationError(f"{len(report.failures)} comprobación(es) fallida(s): "
                                + ", ".join(r.name for r in report.failures))
    return report
