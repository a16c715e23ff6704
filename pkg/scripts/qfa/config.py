import os
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# .env in the working directory overrides nothing already set in the environment
load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == '':
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


def _env_flag(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ('1', 'true', 'yes', 'on')


# Runtime and budget defaults
DEFAULTS: Dict[str, Any] = {
    'log_level': os.getenv('QFA_LOG_LEVEL', 'WARNING'),
    'log_file': os.getenv('QFA_LOG_FILE', 'logs/qfa.log'),
    'threads': _env_int('QFA_THREADS', 1),
    'progress': _env_flag('QFA_PROGRESS', False),
    'results_dir': os.getenv('QFA_RESULTS_DIR', 'results'),
    'budget': {
        'max_word_len': _env_int('QFA_MAX_WORD_LEN', 12),
        'closure_cap': _env_int('QFA_CLOSURE_CAP', 100000),
        'max_degree': _env_int('QFA_MAX_DEGREE', 3),
        'round_schedule': 1,
        'max_monomials': 300,
    },
    'freeness_max_len': 8,
    'approx_digits': 6,
}


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """Configure root logging: log file plus stderr stream"""
    level_name = (level or DEFAULTS['log_level']).upper()
    handlers = [logging.StreamHandler()]
    path = log_file if log_file is not None else DEFAULTS['log_file']
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        handlers.insert(0, logging.FileHandler(path))
    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )


def progress_enabled() -> bool:
    return bool(DEFAULTS['progress'])
