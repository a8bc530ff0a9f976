"""Distributed quantum-enhanced optimization: hybrid preconditioner + classical refiner"""
from dqeo.config import settings

__version__ = "1.0.0"
__app_name__ = settings.app_name
