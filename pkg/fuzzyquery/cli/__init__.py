from .error_handler import run_command
from .main import main

__all__ = ["run_command", "main"]
