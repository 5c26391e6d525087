"""
Driver de linha de comando: configuração estrita, pipelines por subcomando e saída CSV
"""

from .config import (
    RunConfig,
    parse_config
)

from .pipelines import (
    PIPELINES,
    run
)

from .output import (
    CsvWriter,
    header_lines,
    read_csv,
    body
)

__all__ = [
    # Configuração
    'RunConfig',
    'parse_config',

    # Pipelines
    'PIPELINES',
    'run',

    # Saída
    'CsvWriter',
    'header_lines',
    'read_csv',
    'body'
]
