#!/usr/bin/env python3
"""
Escrita determinística de artefatos CSV

Cada arquivo começa com um bloco de comentários (versão, sha256 da configuração,
semente e subcomando) seguido do corpo gerado pelo pandas com 17 dígitos significativos
"""

import os
import logging
from typing import Dict, List, Optional, Sequence

import pandas as pd

import settings

logger = logging.getLogger(__name__)

VERSION_PREFIX = '# merg '


def header_lines(digest: str, seed: int, command: str) -> List[str]:
    return [
        f"{VERSION_PREFIX}{settings.VERSION}",
        f"# config_sha256 {digest}",
        f"# seed {seed}",
        f"# command {command}"
    ]


class CsvWriter:
    """Escreve tabelas num diretório de saída com o mesmo cabeçalho de proveniência"""

    def __init__(self, directory: str, digest: str, seed: int, command: str, precision: int = 17):
        self.directory = directory
        self.header = header_lines(digest, seed, command)
        self.float_format = f'%.{precision}g'
        self.written: List[str] = []

    def write(self, name: str, rows: Sequence[Dict], columns: Optional[Sequence[str]] = None) -> str:
        """Escreve rows (lista de dicionários) em <directory>/<name>.csv e retorna o caminho"""
        os.makedirs(self.directory, exist_ok=True)
        path = os.path.join(self.directory, f"{name}.csv")
        frame = pd.DataFrame(list(rows), columns=list(columns) if columns is not None else None)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            for line in self.header:
                handle.write(line + '\n')
            frame.to_csv(handle, index=False, float_format=self.float_format, lineterminator='\n')
        self.written.append(path)
        logger.info(f"💾 {path}: {len(frame)} linha(s)")
        return path


def read_csv(path: str) -> pd.DataFrame:
    """Lê um artefato ignorando o bloco de cabeçalho"""
    return pd.read_csv(path, comment='#')


def body(path: str) -> str:
    """Corpo do arquivo sem a linha de versão (base da comparação de determinismo)"""
    with open(path, encoding='utf-8') as handle:
        return ''.join(line for line in handle if not line.startswith(VERSION_PREFIX))
