"""
Utility modules for contrakt.
"""

from .logger import setup_logger, get_logger
from .storage import ArtifactStorage
from .parallel import parallel_map, worker_count

__all__ = [
    'setup_logger',
    'get_logger',
    'ArtifactStorage',
    'parallel_map',
    'worker_count',
]
