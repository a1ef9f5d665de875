"""Utilidades de registro, configuración y rutas."""
