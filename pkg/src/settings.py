"""
Configurações de processo lidas do ambiente (config.env)
"""

import os
from dotenv import load_dotenv

# Carregar variáveis de ambiente do config.env ANTES de qualquer outra coisa
load_dotenv('config.env')

VERSION = "0.1.0"


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return max(default, minimum)
    try:
        return max(int(raw), minimum)
    except ValueError:
        return max(default, minimum)


def max_workers() -> int:
    """Limite de workers dos pools de threads (MERG_THREADS)"""
    return _int_env('MERG_THREADS', os.cpu_count() or 1)


def shard_size() -> int:
    """Tamanho dos shards de Monte Carlo (MERG_SHARD_SIZE)"""
    return _int_env('MERG_SHARD_SIZE', 10_000)


def log_level() -> str:
    return os.getenv('MERG_LOG_LEVEL', 'INFO').upper()
