"""
Módulo de Comandos de Línea.

Define la interfaz `python -m mallowsAvoid <subcomando>`: análisis de
argumentos, armado de RunConfig a partir de la línea de comandos, el entorno y
config.json, ejecución de cada subcomando y escritura de resultados en CSV,
JSON o xlsx.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .. import __version__
from ..core import exact_engine as ee
from ..core import genfunc_bounds as gb
from ..core.errors import DomainError, MallowsError, ResourceLimitError, VerificationError
from ..core.excel_manager import ExcelManager
from ..core.mallows import (
    RNG_ID, MallowsParam, SamplerState, expected_inversions,
    inversion_statistics, sample_permutations,
)
from ..core.montecarlo import estimate_avoidance
from ..core.permutations import Pattern, inversions
from ..utils.config_manager import ConfigManager
from ..utils.logging_utils import LogManager
from ..utils.path_utils import package_path
from .verify import CHECKS, run_suite

logger = LogManager.get_logger(__name__)

SCHEMA_VERSION = 1
FORMATS = ("csv", "json", "xlsx")
TABLE_GRID = "0.1:0.9:0.1"
GRID_TOLERANCE = 1e-9
ROOT_HEADER = "d_n^{1/n}"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_RESOURCE = 3

ENV_HELP = """
variables de entorno:
  MALLOWS_THREADS    número de hilos/fragmentos si no se pasa --workers
  MALLOWS_DEPTH_CAP  profundidad máxima de la bisección si no se pasa --depth-cap

códigos de salida: 0 éxito, 1 uso incorrecto, 2 verificación fallida, 3 límite de recursos
"""


class UsageError(DomainError):
    """Argumentos de línea de comandos inválidos."""


class _Parser(argparse.ArgumentParser):
    # argparse sale con 2; aquí 2 está reservado para la verificación
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    """Configuración efectiva de una ejecución."""
    command: str
    q_values: List[float] = field(default_factory=list)
    q_text: Optional[str] = None
    n: Optional[int] = None
    N: Optional[int] = None
    pattern: Optional[str] = None
    samples: int = 100000
    seed: int = 0
    eps: float = 0.01
    depth_cap: int = gb.DEFAULT_DEPTH_CAP
    step: float = 0.1
    fmt: str = "csv"
    output: Optional[str] = None
    rational: bool = False
    workers: int = 1
    method: str = "tree"
    stats: bool = False
    checks: Optional[List[str]] = None

    def to_json(self) -> Dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class Table:
    """Salida tabular de un subcomando."""
    name: str
    headers: List[str]
    rows: List[List[Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    # en CSV: solo la primera columna, un valor por línea y sin encabezados
    bare: bool = False


def parse_grid(text: str) -> List[float]:
    """
    Interpretar una grilla "inicio:fin:paso" (fin incluido salvo error de redondeo; nunca se pasa de fin).

    Args:
        text (str): Grilla o un único valor

    Returns:
        List[float]: Valores en orden creciente
    """
    parts = text.split(":")
    try:
        numbers = [float(p) for p in parts]
    except ValueError as e:
        raise DomainError(f"Grilla mal formada: '{text}'") from e
    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3:
        raise DomainError(f"La grilla debe tener la forma inicio:fin:paso, recibido '{text}'")
    start, stop, step = numbers
    if step <= 0:
        raise DomainError(f"El paso de la grilla debe ser > 0, recibido {step}")
    count = int(math.floor((stop - start) / step + GRID_TOLERANCE)) + 1
    values = [round(start + k * step, 12) for k in range(max(count, 0))]
    if not values:
        raise DomainError(f"La grilla '{text}' está vacía")
    return values


def reduce_duality(q: float, pattern: Optional[str]) -> Tuple[float, Optional[str], Optional[str]]:
    """
    Aplicar P_n^q(S_n(τ)) = P_n^{1/q}(S_n(τ^rev)) si q > 1.

    Returns:
        Tuple[float, Optional[str], Optional[str]]: (q efectivo, patrón efectivo, nota para metadatos)
    """
    param = MallowsParam(q)
    if not param.is_dual:
        return q, pattern, None
    reduced = str(Pattern.of(pattern).reversed()) if pattern else None
    note = f"q={q} > 1: calculado con q'={1 / q}" + (f" y el patrón invertido {reduced}" if reduced else "")
    logger.info(note)
    return 1 / q, reduced, note


def _require_single_q(config: RunConfig) -> float:
    if len(config.q_values) != 1:
        raise UsageError(f"El subcomando {config.command} requiere un único --q")
    return config.q_values[0]


def _require_unit_q(values: Sequence[float]):
    for q in values:
        if not 0 < q < 1:
            raise DomainError(f"Las cotas del límite requieren q ∈ (0,1), recibido {q}")


def _exact_q(q_text: str, duality_note: Optional[str]) -> Fraction:
    # "1/3" o "0.25" se leen como racionales exactos
    value = Fraction(q_text)
    return 1 / value if duality_note else value


def cmd_exact(config: RunConfig) -> Table:
    """Probabilidad exacta y polinomio numerador del oráculo."""
    pattern = config.pattern
    metadata: Dict[str, Any] = {}
    q: Any = None
    note = None
    if config.q_values:
        q, pattern, note = reduce_duality(_require_single_q(config), pattern)
        if note:
            metadata["duality"] = note
    result = ee.brute_force_avoidance(config.n, pattern, method=config.method, workers=config.workers)
    total = math.factorial(config.n)
    row: List[Any] = [config.n, str(result.pattern), result.count, total, str(result.numerator)]
    headers = ["n", "pattern", "count", "n_factorial", "numerator"]
    if q is not None:
        headers += ["q", "probability"]
        if q == 1:
            probability = f"{result.count}/{total}"
        elif config.rational:
            probability = str(result.probability(_exact_q(config.q_text, note)))
        else:
            probability = result.probability(float(q))
        row += [q, probability]
    metadata["polynomial_json"] = result.numerator.to_json()
    return Table("exact", headers, [row], metadata)


def cmd_recur(config: RunConfig) -> Table:
    """Serie d_1..d_N por la recurrencia."""
    q, pattern, note = reduce_duality(_require_single_q(config), config.pattern)
    metadata = {"duality": note} if note else {}
    if config.rational:
        values = ee.avoidance_recurrence_exact(config.N, _exact_q(config.q_text, note), pattern)
        rows = [[n, str(values[n]), float(values[n]) ** (1 / n)] for n in range(1, config.N + 1)]
        return Table("recur", ["n", "d_n", ROOT_HEADER], rows, metadata)
    series = ee.avoidance_recurrence(config.N, q, pattern)
    return Table("recur", ["n", "d_n", "log_d_n", ROOT_HEADER], [list(r) for r in series.rows()], metadata)


def cmd_bounds(config: RunConfig) -> Table:
    """Filas de cotas sobre la grilla de q."""
    _require_unit_q(config.q_values)
    reports = [gb.bound_report(q, config.eps, config.depth_cap) for q in config.q_values]
    for report in reports:
        if report.flagged:
            logger.warning(f"q={report.q}: intervalo no convergido en depth_cap={config.depth_cap}")
    rows = [list(r.as_row().values()) for r in reports]
    headers = list(reports[0].as_row().keys())
    return Table("bounds", headers, rows, {"eps": config.eps, "depth_cap": config.depth_cap})


def cmd_limit(config: RunConfig) -> Table:
    """Intervalo certificado para un q."""
    q = _require_single_q(config)
    _require_unit_q([q])
    interval = gb.limit_312(q, config.eps, config.depth_cap)
    row = [q, interval.lo, interval.hi, interval.width, interval.depth_used, interval.flagged, interval.steps]
    return Table("limit", ["q", "lo", "hi", "width", "depth_used", "flagged", "steps"], [row],
                 {"eps": config.eps, "depth_cap": config.depth_cap})


def cmd_sample(config: RunConfig) -> Table:
    """Muestras de Mallows(q), una por línea; con --stats agrega índice, inversiones y momentos."""
    q = _require_single_q(config)
    param = MallowsParam(q)
    state = SamplerState(seed=config.seed)
    samples = sample_permutations(config.n, q, config.samples, state)
    metadata: Dict[str, Any] = {"seed": config.seed, "q": q, "n": config.n, "rng_id": RNG_ID}
    if param.is_dual:
        metadata["duality"] = f"q={q} > 1: muestreado con q'={1 / q} y revertido"
    if config.stats:
        mean, variance = inversion_statistics(samples)
        metadata.update({
            "mean_inversions": mean,
            "variance_inversions": variance,
            "expected_inversions": expected_inversions(config.n, q),
        })
        rows = [[i, str(p), inversions(p)] for i, p in enumerate(samples)]
        return Table("sample", ["index", "permutation", "inversions"], rows, metadata)
    return Table("sample", ["permutation"], [[str(p)] for p in samples], metadata, bare=True)


def cmd_estimate(config: RunConfig) -> Table:
    """Estimación Monte Carlo de la probabilidad de evitar el patrón."""
    q, pattern, note = reduce_duality(_require_single_q(config), config.pattern)
    estimate = estimate_avoidance(config.n, q, pattern, config.samples, config.seed, config.workers)
    data = estimate.to_json()
    metadata: Dict[str, Any] = {"rng_id": RNG_ID}
    if note:
        metadata["duality"] = note
    return Table("estimate", list(data.keys()), [list(data.values())], metadata)


def cmd_table(config: RunConfig) -> Table:
    """Tabla UB / LB / valor verdadero sobre q = 0.1..0.9."""
    grid = parse_grid(TABLE_GRID)
    ub_row: List[Any] = ["UB"]
    lb_row: List[Any] = ["LB"]
    true_row: List[Any] = ["true"]
    for q in grid:
        lb, ub = gb.closed_form_bounds(q)
        interval = gb.limit_312(q, config.eps, config.depth_cap)
        ub_row.append(round(ub, 3))
        lb_row.append(round(lb, 3))
        flag = "*" if interval.flagged else ""
        true_row.append(f"{interval.midpoint:.3f}±{interval.width / 2:.3f}{flag}")
    headers = ["row"] + [f"{q:g}" for q in grid]
    return Table("table", headers, [ub_row, lb_row, true_row],
                 {"eps": config.eps, "depth_cap": config.depth_cap})


def cmd_plotdata(config: RunConfig) -> Table:
    """Series (q, LB), (q, UB), (q, punto medio) para graficar externamente."""
    grid = config.q_values or parse_grid(f"{config.step}:{1 - config.step}:{config.step}")
    _require_unit_q(grid)
    rows = []
    for q in grid:
        lb, ub = gb.closed_form_bounds(q)
        interval = gb.limit_312(q, config.eps, config.depth_cap)
        rows.append([q, lb, ub, interval.midpoint, interval.flagged])
    return Table("plotdata", ["q", "LB", "UB", "bisect_mid", "flagged"], rows,
                 {"eps": config.eps, "depth_cap": config.depth_cap})


def cmd_verify(config: RunConfig) -> Table:
    """Suite de invariantes con manifiesto aprobado/fallido."""
    report = run_suite(config.checks)
    rows = [[r.name, "OK" if r.passed else "FALLO", round(r.seconds, 3), r.detail] for r in report.results]
    table = Table("verify", ["check", "status", "seconds", "detail"], rows,
                  {"passed": report.passed, "failures": len(report.failures)})
    if not report.passed:
        raise _VerificationFailed(table)
    return table


class _VerificationFailed(VerificationError):
    def __init__(self, table: Table):
        super().__init__(f"{table.metadata['failures']} comprobación(es) fallida(s)")
        self.table = table


COMMANDS: Dict[str, Callable[[RunConfig], Table]] = {
    "exact": cmd_exact,
    "recur": cmd_recur,
    "bounds": cmd_bounds,
    "limit": cmd_limit,
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "table": cmd_table,
    "plotdata": cmd_plotdata,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    """Construir el analizador con las opciones globales y los subcomandos."""
    parser = _Parser(
        prog="mallowsAvoid",
        description="Probabilidad de evitar patrones de longitud 3 bajo Mallows(q): cálculo exacto, cotas, muestreo y verificación",
        epilog=ENV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", help="Habilitar registro de depuración")
    parser.add_argument("--no-log-file", action="store_true", help="No escribir archivo de registro")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, help="Formato de salida (predeterminado: config.json)")
    parser.add_argument("--output", help="Archivo de salida (obligatorio para xlsx; stdout si se omite)")
    parser.add_argument("--workers", type=int, help="Hilos/fragmentos para fuerza bruta y Monte Carlo")
    parser.add_argument("--config", default="config.json", help="Ruta del archivo de configuración")

    sub = parser.add_subparsers(dest="command", metavar="subcomando")
    sub.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, description=help_text, epilog=ENV_HELP,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("exact", "Probabilidad exacta por fuerza bruta y polinomio numerador")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--q", help="Valor de q (opcional); q=1 es el caso uniforme")
    p.add_argument("--method", choices=("tree", "full"), default="tree")
    p.add_argument("--rational", action="store_true", help="Imprimir la probabilidad como fracción exacta")

    p = add("recur", "Serie d_n por la recurrencia (312, 231, 213, 132)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--rational", action="store_true", help="Aritmética racional exacta (N ≤ 30)")

    p = add("bounds", "Cotas LB/UB, 4(1−q) e intervalo bisecado sobre una grilla de q")
    p.add_argument("--q", help="Valor o grilla inicio:fin:paso")
    p.add_argument("--eps", type=float)
    p.add_argument("--depth-cap", type=int)

    p = add("limit", "Intervalo certificado para el límite de 312")
    p.add_argument("--q", required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--depth-cap", type=int)

    p = add("sample", "Muestrear permutaciones de Mallows(q)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--count", type=int, default=10, dest="samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--stats", action="store_true", help="Agregar media y varianza de inversiones")

    p = add("estimate", "Estimación Monte Carlo de P_n^q(S_n(τ))")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)

    p = add("table", "Tabla UB / LB / valor verdadero para q = 0.1..0.9")
    p.add_argument("--eps", type=float)
    p.add_argument("--depth-cap", type=int)

    p = add("plotdata", "Series para graficar LB, UB y el punto medio bisecado")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--eps", type=float)
    p.add_argument("--depth-cap", type=int)

    p = add("verify", "Ejecutar la suite de invariantes")
    p.add_argument("--check", action="append", dest="checks", choices=[name for name, _ in CHECKS],
                   help="Ejecutar solo esta comprobación (repetible)")
    return parser


def build_run_config(args: argparse.Namespace, settings: ConfigManager,
                     environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Armar RunConfig con la precedencia línea de comandos > entorno > config.json.

    Args:
        args (argparse.Namespace): Argumentos analizados
        settings (ConfigManager): Configuración persistente
        environ (Optional[Dict[str, str]]): Entorno (por defecto os.environ)

    Returns:
        RunConfig: Configuración validada
    """
    def pick(name: str, key: Optional[str] = None):
        value = getattr(args, name, None)
        return value if value is not None else settings.get_default(key or name, environ)

    config = RunConfig(
        command=args.command,
        n=getattr(args, "n", None),
        N=getattr(args, "N", None),
        pattern=getattr(args, "pattern", None),
        samples=int(pick("samples")),
        seed=int(pick("seed")),
        eps=float(pick("eps")),
        depth_cap=int(pick("depth_cap")),
        step=float(getattr(args, "step", None) or settings.get_default("step", environ)),
        fmt=pick("fmt", "format"),
        output=args.output,
        rational=getattr(args, "rational", False),
        workers=int(pick("workers")),
        method=getattr(args, "method", "tree"),
        stats=getattr(args, "stats", False),
        checks=getattr(args, "checks", None),
    )
    q_text = getattr(args, "q", None)
    if q_text is not None:
        config.q_text = q_text
        try:
            config.q_values = parse_grid(q_text) if ":" in q_text else [float(Fraction(q_text))]
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"Valor de q inválido: '{q_text}'") from e
    elif config.command == "bounds":
        config.q_values = parse_grid(f"0.1:0.9:{config.step}")
    if config.workers < 1:
        raise UsageError(f"--workers debe ser ≥ 1, recibido {config.workers}")
    if config.samples < 1:
        raise UsageError(f"El número de muestras debe ser ≥ 1, recibido {config.samples}")
    if config.eps <= 0:
        raise UsageError(f"--eps debe ser > 0, recibido {config.eps}")
    if config.fmt not in FORMATS:
        raise UsageError(f"Formato desconocido: '{config.fmt}'")
    if config.fmt == "xlsx" and not config.output:
        raise UsageError("--format xlsx requiere --output")
    for q in config.q_values:
        MallowsParam(q)
    return config


def load_schema(command: str) -> Dict[str, Any]:
    """Cargar el documento de esquema JSON publicado para un subcomando."""
    path = package_path(os.path.join("schemas", f"{command}.schema.json"))
    if not os.path.exists(path):
        raise DomainError(f"No hay esquema publicado para '{command}'")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def render(table: Table, fmt: str) -> str:
    """Serializar una tabla como CSV o JSON."""
    if fmt == "json":
        document = {
            "schema_version": SCHEMA_VERSION,
            "command": table.name,
            "metadata": table.metadata,
            "rows": [dict(zip(table.headers, row)) for row in table.rows],
        }
        return json.dumps(document, indent=2, ensure_ascii=False, default=str) + "\n"
    if table.bare:
        return "".join(f"{row[0]}\n" for row in table.rows)
    buffer = io.StringIO()
    buffer.write(f"# {table.name} v{SCHEMA_VERSION}\n")
    for key, value in table.metadata.items():
        buffer.write(f"# {key}: {value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.headers)
    writer.writerows(table.rows)
    return buffer.getvalue()


def emit(table: Table, config: RunConfig, stream=None):
    """Escribir la tabla en el destino configurado."""
    if config.fmt == "xlsx":
        manager = ExcelManager(config.output)
        manager.add_sheet(table.name, table.headers, table.rows, table.metadata)
        manager.save()
        return
    text = render(table, config.fmt)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"Resultado escrito en {config.output}")
    else:
        (stream or sys.stdout).write(text)


def main(argv: Optional[List[str]] = None, stream=None) -> int:
    """
    Punto de entrada de la línea de comandos.

    Args:
        argv (Optional[List[str]]): Argumentos (por defecto sys.argv[1:])
        stream: Destino de los datos cuando no hay --output (por defecto stdout)

    Returns:
        int: Código de salida
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE

    settings = ConfigManager(args.config)
    log_to_file = settings.config.get("log_to_file", True) and not args.no_log_file
    logger_root = LogManager(debug=args.debug, log_to_file=log_to_file).get_logger()
    try:
        config = build_run_config(args, settings)
        logger_root.info(f"Ejecutando '{config.command}' (mallowsAvoid {__version__})")
        logger.debug(f"RunConfig: {config.to_json()}")
        table = COMMANDS[config.command](config)
        emit(table, config, stream)
        settings.add_recent_run(config.command, config.to_json())
        logger_root.info(f"'{config.command}' finalizado correctamente")
        return EXIT_OK
    except _VerificationFailed as e:
        emit(e.table, config, stream)
        logger.error(str(e))
        return EXIT_VERIFICATION
    except ResourceLimitError as e:
        logger.error(f"Límite de recursos: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, MallowsError) as e:
        logger.error(str(e))
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.critical(f"Error fatal: {str(e)}", exc_info=True)
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        LogManager.flush()
        LogManager.close()
