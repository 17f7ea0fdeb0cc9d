"""
Command-line layer: input documents, run configs and command handlers.
"""

from .run_config import RunConfig, COMMANDS
from .commands import run, HANDLERS, EXIT_OK, EXIT_VIOLATED, EXIT_INPUT_ERROR

__all__ = [
    'RunConfig',
    'COMMANDS',
    'run',
    'HANDLERS',
    'EXIT_OK',
    'EXIT_VIOLATED',
    'EXIT_INPUT_ERROR',
]
