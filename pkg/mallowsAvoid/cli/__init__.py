"""Interfaz de línea de comandos y suite de verificación."""
