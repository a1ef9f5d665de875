import os
import sys


def resource_path(relative_path):
    """Devuelve la ruta absoluta a un recurso del proyecto, compatible con PyInstaller y desarrollo."""
    if getattr(sys, 'frozen', False):
        # Ejecución empaquetada: recursos junto al ejecutable o en _MEIPASS
        base_path = getattr(sys, '_MEIPASS', os.path.dirname(sys.executable))
    else:
        # Desarrollo: la raíz del proyecto está dos niveles arriba de utils/
        base_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
    return os.path.join(base_path, relative_path)


def package_path(relative_path):
    """Devuelve la ruta absoluta a un archivo de datos dentro del paquete (p. ej. schemas/)."""
    base_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
    return os.path.join(base_path, relative_path)
