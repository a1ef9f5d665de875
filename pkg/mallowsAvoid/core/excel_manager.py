"""
Módulo Gestor de Libros Excel.

Exporta las tablas que produce la línea de comandos (cotas, series, datos
para gráficas) a un libro .xlsx con una hoja por salida.
"""

import os
from typing import Any, Dict, List, Sequence

import openpyxl
from openpyxl.styles import Font
from openpyxl.utils import get_column_letter
from openpyxl.utils.exceptions import InvalidFileException

from .errors import DomainError, MallowsError
from ..utils.logging_utils import LogManager

logger = LogManager.get_logger(__name__)

# Excel limita el nombre de hoja a 31 caracteres
MAX_SHEET_TITLE = 31


class ExcelManager:
    """Construye y guarda un libro con hojas tabulares."""

    def __init__(self, file_path: str):
        """
        Inicializar Gestor de Excel.

        Args:
            file_path (str): Ruta del libro a escribir (.xlsx)
        """
        if not file_path:
            logger.error("No se proporcionó ruta de archivo para el libro")
            raise DomainError("Se requiere --output para exportar a xlsx")
        if not file_path.lower().endswith(".xlsx"):
            logger.error(f"Extensión de archivo inválida: {file_path}. Debe ser .xlsx")
            raise DomainError("El archivo debe tener extensión .xlsx")
        self.file_path = file_path
        self.workbook = openpyxl.Workbook()
        # La hoja vacía inicial se reemplaza por la primera hoja agregada
        self._placeholder = self.workbook.active

    def add_sheet(self, title: str, headers: Sequence[str], rows: Sequence[Sequence[Any]],
                  metadata: Dict[str, Any] = None):
        """
        Agregar una hoja con encabezados en negrita y filas de datos.

        Args:
            title (str): Nombre de la hoja
            headers (Sequence[str]): Encabezados de columna
            rows (Sequence[Sequence[Any]]): Filas en orden
            metadata (Dict[str, Any]): Pares clave/valor escritos bajo la tabla
        """
        title = title[:MAX_SHEET_TITLE]
        if self._placeholder is not None:
            sheet = self._placeholder
            sheet.title = title
            self._placeholder = None
        else:
            sheet = self.workbook.create_sheet(title)
        sheet.append(list(headers))
        for cell in sheet[1]:
            cell.font = Font(bold=True)
        for row in rows:
            sheet.append([_cell_value(v) for v in row])
        if metadata:
            sheet.append([])
            for key, value in metadata.items():
                sheet.append([key, _cell_value(value)])
        for index, header in enumerate(headers, start=1):
            sheet.column_dimensions[get_column_letter(index)].width = max(12, len(str(header)) + 2)
        logger.debug(f"Hoja '{title}' agregada con {len(rows)} fila(s)")

    def save(self) -> str:
        """
        Guardar el libro en disco.

        Returns:
            str: Ruta escrita
        """
        directory = os.path.dirname(self.file_path)
        try:
            if directory:
                os.makedirs(directory, exist_ok=True)
            self.workbook.save(self.file_path)
        except PermissionError as e:
            logger.error(f"Error de permisos al escribir {self.file_path}. Verifique que no esté abierto en otro programa.")
            raise MallowsError(f"Error de permisos al escribir {self.file_path}") from e
        logger.info(f"Libro Excel guardado: {self.file_path} ({', '.join(self.workbook.sheetnames)})")
        return self.file_path


def _cell_value(value: Any) -> Any:
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def read_sheet(file_path: str, title: str) -> List[List[Any]]:
    """
    Leer una hoja completa como lista de filas (incluye encabezados).

    Args:
        file_path (str): Ruta del libro
        title (str): Nombre de la hoja

    Returns:
        List[List[Any]]: Filas con sus valores
    """
    try:
        workbook = openpyxl.load_workbook(file_path, data_only=True)
    except InvalidFileException as e:
        logger.error(f"Formato de archivo Excel inválido: {file_path}")
        raise DomainError(f"Formato de archivo Excel inválido: {file_path}") from e
    if title not in workbook.sheetnames:
        logger.error(f"Hoja '{title}' no encontrada. Hojas disponibles: {', '.join(workbook.sheetnames)}")
        raise DomainError(f"Hoja '{title}' no encontrada. Hojas disponibles: {', '.join(workbook.sheetnames)}")
    return [list(row) for row in workbook[title].iter_rows(values_only=True)]
