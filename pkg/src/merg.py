#!/usr/bin/env python3
"""
merg: ponto de entrada da linha de comando

    python src/merg.py <subcomando> --config caminho.yaml [--seed N] [--out DIR]

Erros do merg viram uma linha JSON por problema no stderr (saída 2);
exceções inesperadas saem com status 1 e código "internal"
"""

import sys
import json
import logging
import argparse
from typing import List, Optional

import settings
from errors import ConfigError, ConfigIssue, MergError
from driver import PIPELINES, parse_config, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_MERG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='merg', description="Ergodicidade multiplicativa de cadeias de Markov")
    parser.add_argument('--version', action='version', version=f"merg {settings.VERSION}")
    parser.add_argument('command', choices=sorted(PIPELINES), help="subcomando")
    parser.add_argument('--config', required=True, help="arquivo YAML da execução")
    parser.add_argument('--seed', type=int, default=None, help="sobrescreve mc.seed")
    parser.add_argument('--out', default=None, help="sobrescreve output.directory")
    return parser


def _emit(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, ensure_ascii=False, default=str) + '\n')


def report_error(error: MergError) -> None:
    if isinstance(error, ConfigError):
        for issue in error.issues:
            _emit({'error': error.code, 'message': str(issue),
                   'details': {'key': issue.key, 'line': issue.line}})
        return
    _emit(error.to_dict())


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=settings.log_level(), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        with open(args.config, encoding='utf-8') as handle:
            text = handle.read()
        config = parse_config(text)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError([ConfigIssue("--seed", "a semente deve ser >= 0")])
            config.mc.seed = args.seed
        if args.out is not None:
            config.output.directory = args.out
        result = run(args.command, config)
    except MergError as error:
        logger.error(f"❌ {error.code}: {error.message}")
        report_error(error)
        return EXIT_MERG_ERROR
    except OSError as error:
        _emit({'error': 'io', 'message': str(error), 'details': {'path': args.config}})
        return EXIT_MERG_ERROR
    except Exception as error:
        logger.exception("❌ Erro inesperado")
        _emit({'error': 'internal', 'message': str(error), 'details': {'type': type(error).__name__}})
        return EXIT_INTERNAL

    for path in result['files']:
        print(path)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
