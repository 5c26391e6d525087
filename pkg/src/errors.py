"""
Hierarquia de exceções do merg
Cada erro carrega um código legível por máquina e um dicionário de detalhes,
usados pelo driver para emitir JSON lines no stderr
"""

from typing import Any, Dict, List, Optional
from dataclasses import dataclass, field


class MergError(Exception):
    """Erro base de todos os módulos"""

    code = "merg_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.code,
            'message': self.message,
            'details': self.details
        }


class ModelError(MergError):
    """Modelo de Markov, lei inicial ou kernel inválido"""
    code = "model_invalid"


class ObservableError(MergError):
    """Observável negativo, não finito ou sem metadados exigidos"""
    code = "observable_invalid"


class ExpressionError(MergError):
    """Expressão malformada; `position` aponta o caractere do erro"""
    code = "expression_invalid"

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        super().__init__(message, text=text, position=position)
        self.text = text
        self.position = position

    def caret(self) -> str:
        """Retorna a expressão com um ^ sob a posição do erro"""
        if self.position is None:
            return self.text
        return f"{self.text}\n{' ' * self.position}^"


class GridError(MergError):
    """Grade de truncamento não contém massa estacionária suficiente"""
    code = "grid_too_small"


class SpectralConvergenceError(MergError):
    """Iteração de potência sem convergência"""
    code = "perron_not_converged"


class PerronPositivityError(MergError):
    """Falha na asserção de positividade de Perron"""
    code = "perron_positivity"


class PreconditionError(MergError):
    """Pré-condição de uma operação violada"""
    code = "precondition"


class ErgodicityViolation(MergError):
    """Resíduos do ajuste não decrescem com n"""
    code = "ergodicity_violated"


@dataclass(frozen=True)
class ConfigIssue:
    """Um problema de configuração com chave e linha"""
    key: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"linha {self.line}, " if self.line is not None else ""
        return f"{where}{self.key}: {self.message}"


class ConfigError(MergError):
    """Configuração rejeitada; contém a lista completa de problemas"""
    code = "config_invalid"

    def __init__(self, issues: List[ConfigIssue]):
        self.issues = list(issues)
        message = "; ".join(str(issue) for issue in self.issues)
        super().__init__(message, issues=[
            {'key': i.key, 'line': i.line, 'message': i.message} for i in self.issues
        ])
