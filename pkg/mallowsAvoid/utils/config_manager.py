"""
Módulo para manejar la configuración persistente de la aplicación.

Orden de precedencia de los valores: argumento de línea de comandos >
variable de entorno > config.json > valor predeterminado.
"""

import copy
import json
import os
import shutil
from typing import Any, Dict, List, Optional

from .logging_utils import LogManager
from .path_utils import resource_path

logger = LogManager.get_logger(__name__)

# Variables de entorno reconocidas y la clave de "defaults" que sobrescriben
ENV_OVERRIDES = {
    "MALLOWS_THREADS": "workers",
    "MALLOWS_DEPTH_CAP": "depth_cap",
}


class ConfigManager:
    """Gestiona la configuración persistente de la aplicación."""

    # Estructura predeterminada para el archivo de configuración
    DEFAULT_CONFIG = {
        "defaults": {
            "seed": 0,
            "samples": 100000,
            "depth_cap": 65536,
            "step": 0.1,
            "eps": 0.01,
            "workers": 1,
            "format": "csv",
        },
        "log_to_file": True,
        "recent_runs": [],  # Lista de diccionarios {command: str, args: dict}
        "max_recent_runs": 10,
    }

    def __init__(self, config_file: str = "config.json"):
        """
        Inicializar gestor de configuración.

        Args:
            config_file (str): Nombre (relativo a la raíz del proyecto) o ruta absoluta
        """
        self.config_file = config_file if os.path.isabs(config_file) else resource_path(config_file)
        self._ensure_config_file()
        self.config = self._load_config()

    def _ensure_config_file(self):
        """Crear el archivo con los valores predeterminados si no existe."""
        if os.path.exists(self.config_file):
            return
        logger.info(f"Archivo de configuración '{self.config_file}' no encontrado. Creando uno nuevo...")
        try:
            directory = os.path.dirname(self.config_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            self._write_default_config()
        except OSError as e:
            logger.error(f"Error al crear archivo de configuración: {str(e)}")

    def _write_default_config(self):
        """Escribir la configuración predeterminada al archivo de configuración."""
        with open(self.config_file, 'w', encoding='utf-8') as f:
            json.dump(self.DEFAULT_CONFIG, f, indent=4)

    def _load_config(self) -> dict:
        """
        Cargar configuración desde archivo. Si el archivo está corrupto o no tiene
        la estructura correcta, restaura la configuración predeterminada.

        Returns:
            dict: Configuración cargada o predeterminada
        """
        if not os.path.exists(self.config_file):
            return copy.deepcopy(self.DEFAULT_CONFIG)
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded_config = json.load(f)
        except json.JSONDecodeError:
            logger.error("Error al decodificar el archivo JSON. Restaurando configuración predeterminada.")
            self._backup_corrupt_file()
            self._write_default_config()
            return copy.deepcopy(self.DEFAULT_CONFIG)
        except OSError as e:
            logger.error(f"Error inesperado al cargar configuración: {str(e)}")
            return copy.deepcopy(self.DEFAULT_CONFIG)

        if not isinstance(loaded_config, dict):
            logger.warning("El archivo de configuración no contiene un objeto JSON válido. Restaurando configuración predeterminada.")
            return copy.deepcopy(self.DEFAULT_CONFIG)

        # Asegurar que todas las secciones y claves predeterminadas existan
        config_modified = False
        for key, value in self.DEFAULT_CONFIG.items():
            if key not in loaded_config:
                loaded_config[key] = copy.deepcopy(value)
                config_modified = True
                logger.debug(f"Agregada sección faltante '{key}' a la configuración")
            elif isinstance(value, dict) and isinstance(loaded_config[key], dict):
                for sub_key, sub_value in value.items():
                    if sub_key not in loaded_config[key]:
                        loaded_config[key][sub_key] = sub_value
                        config_modified = True

        if config_modified:
            self.config = loaded_config
            self.save_config()
            logger.info("Archivo de configuración actualizado con secciones faltantes")
        return loaded_config

    def _backup_corrupt_file(self):
        if os.path.getsize(self.config_file) == 0:
            return
        backup_file = f"{self.config_file}.bak"
        try:
            shutil.copy2(self.config_file, backup_file)
            logger.info(f"Se ha creado una copia de seguridad del archivo corrupto: {backup_file}")
        except OSError as e:
            logger.error(f"No se pudo crear copia de seguridad: {str(e)}")

    def save_config(self):
        """Guardar configuración actual en archivo."""
        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=4)
            logger.debug("Configuración guardada exitosamente")
        except OSError as e:
            logger.error(f"Error guardando configuración: {str(e)}")

    def get_default(self, key: str, environ: Optional[Dict[str, str]] = None) -> Any:
        """
        Obtener un valor predeterminado, aplicando las variables de entorno.

        Args:
            key (str): Clave dentro de la sección "defaults"
            environ (Optional[Dict[str, str]]): Entorno a consultar (por defecto os.environ)

        Returns:
            Any: Valor efectivo
        """
        environ = os.environ if environ is None else environ
        for variable, target in ENV_OVERRIDES.items():
            if target == key and environ.get(variable):
                try:
                    return int(environ[variable])
                except ValueError:
                    logger.warning(f"Valor inválido en {variable}: '{environ[variable]}'. Se ignora.")
        defaults = self.config.get("defaults", {})
        return defaults.get(key, self.DEFAULT_CONFIG["defaults"].get(key))

    def add_recent_run(self, command: str, args: Dict[str, Any]):
        """
        Registrar una ejecución reciente al principio de la lista.

        Args:
            command (str): Subcomando ejecutado
            args (Dict[str, Any]): Argumentos efectivos (serializables en JSON)
        """
        entry = {"command": command, "args": args}
        runs = [r for r in self.config.get("recent_runs", []) if r != entry]
        runs.insert(0, entry)
        self.config["recent_runs"] = runs[:self.config.get("max_recent_runs", 10)]
        self.save_config()

    def get_recent_runs(self) -> List[Dict[str, Any]]:
        """
        Obtener la lista de ejecuciones recientes.

        Returns:
            List[Dict[str, Any]]: Ejecuciones, la más reciente primero
        """
        return list(self.config.get("recent_runs", []))
