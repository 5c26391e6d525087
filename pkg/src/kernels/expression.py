#!/usr/bin/env python3
"""
Gramática mínima de expressões em uma variável para observáveis definidos pelo usuário
Literais, x, + - * /, potência (^ ou **), abs, exp, min, max e parênteses
"""

import math
import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from errors import ExpressionError

UNARY_FUNCTIONS = {'abs', 'exp'}
BINARY_FUNCTIONS = {'min', 'max'}

_TOKEN_RE = re.compile(r"""
    (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
  | (?P<space>\s+)
""", re.VERBOSE)


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = 'x'


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' | 'abs' | 'exp'
    arg: 'ExpressionAst'


@dataclass(frozen=True)
class Binary:
    op: str  # '+' | '-' | '*' | '/' | '^' | 'min' | 'max'
    left: 'ExpressionAst'
    right: 'ExpressionAst'


ExpressionAst = Union[Const, Var, Unary, Binary]


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise ExpressionError(f"caractere inesperado '{text[pos]}'", text, pos)
        kind = match.lastgroup
        if kind != 'space':
            tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(('end', '', len(text)))
    return tokens


class _Parser:
    """Parser descendente recursivo; precedência: +- < */ < unário < potência"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> Tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, value: str) -> None:
        kind, text, pos = self.advance()
        if text != value:
            found = text or 'fim da expressão'
            raise ExpressionError(f"esperado '{value}', encontrado '{found}'", self.text, pos)

    def parse(self) -> ExpressionAst:
        if self.peek()[0] == 'end':
            raise ExpressionError("expressão vazia", self.text, 0)
        node = self.expression()
        kind, text, pos = self.peek()
        if kind != 'end':
            raise ExpressionError(f"token inesperado '{text}'", self.text, pos)
        return node

    def expression(self) -> ExpressionAst:
        node = self.term()
        while self.peek()[1] in ('+', '-'):
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> ExpressionAst:
        node = self.unary()
        while self.peek()[1] in ('*', '/'):
            op = self.advance()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> ExpressionAst:
        if self.peek()[1] == '-':
            self.advance()
            return Unary('neg', self.unary())
        if self.peek()[1] == '+':
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> ExpressionAst:
        base = self.atom()
        if self.peek()[1] in ('^', '**'):
            self.advance()
            return Binary('^', base, self.unary())
        return base

    def atom(self) -> ExpressionAst:
        kind, text, pos = self.advance()
        if kind == 'number':
            return Const(float(text))
        if kind == 'name':
            if text == 'x':
                return Var()
            if text in UNARY_FUNCTIONS:
                self.expect('(')
                arg = self.expression()
                self.expect(')')
                return Unary(text, arg)
            if text in BINARY_FUNCTIONS:
                self.expect('(')
                left = self.expression()
                self.expect(',')
                right = self.expression()
                self.expect(')')
                return Binary(text, left, right)
            raise ExpressionError(f"nome desconhecido '{text}'", self.text, pos)
        if text == '(':
            node = self.expression()
            self.expect(')')
            return node
        found = text or 'fim da expressão'
        raise ExpressionError(f"esperado número, x, função ou '(', encontrado '{found}'", self.text, pos)


def parse_expression(text: str) -> ExpressionAst:
    """Converte o texto em árvore; erros trazem a posição para o caret"""
    return _Parser(text).parse()


def print_expression(node: ExpressionAst) -> str:
    """Forma canônica totalmente parentizada (re-parse devolve a mesma árvore)"""
    if isinstance(node, Const):
        if node.value < 0:
            return f"(-{repr(-node.value)})"
        return repr(float(node.value))
    if isinstance(node, Var):
        return 'x'
    if isinstance(node, Unary):
        if node.op == 'neg':
            return f"(-{print_expression(node.arg)})"
        return f"{node.op}({print_expression(node.arg)})"
    if node.op in BINARY_FUNCTIONS:
        return f"{node.op}({print_expression(node.left)}, {print_expression(node.right)})"
    return f"({print_expression(node.left)} {node.op} {print_expression(node.right)})"


def evaluate_expression(node: ExpressionAst, x) -> np.ndarray:
    """Avalia a árvore de forma vetorizada; divisão por zero é erro"""
    x = np.asarray(x, dtype=float)
    if isinstance(node, Const):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x.copy()
    if isinstance(node, Unary):
        arg = evaluate_expression(node.arg, x)
        if node.op == 'neg':
            return -arg
        if node.op == 'abs':
            return np.abs(arg)
        with np.errstate(over='ignore'):
            return np.exp(arg)
    left = evaluate_expression(node.left, x)
    right = evaluate_expression(node.right, x)
    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if node.op == '/':
        if np.any(right == 0):
            raise ExpressionError("divisão por zero", print_expression(node))
        return left / right
    if node.op == '^':
        with np.errstate(over='ignore', invalid='ignore'):
            return np.power(left, right)
    if node.op == 'min':
        return np.minimum(left, right)
    return np.maximum(left, right)


def growth_degree(node: ExpressionAst) -> float:
    """
    Grau polinomial de crescimento em |x| -> infinito (math.inf para crescimento exponencial)
    Usado para comparar o observável com o peso V(x) = (1+|x|)^r0
    """
    if isinstance(node, Const):
        return 0.0
    if isinstance(node, Var):
        return 1.0
    if isinstance(node, Unary):
        if node.op == 'exp':
            far = evaluate_expression(node.arg, np.array([-1e3, 1e3]))
            return math.inf if np.nanmax(far) > 50.0 else 0.0
        return growth_degree(node.arg)
    left = growth_degree(node.left)
    right = growth_degree(node.right)
    if node.op in ('+', '-', 'max'):
        return max(left, right)
    if node.op == 'min':
        return min(left, right)
    if node.op == '*':
        return left + right
    if node.op == '/':
        return left if not math.isfinite(left) else left - right
    # potência
    exponent = _constant_value(node.right)
    if exponent is not None:
        return left * exponent if left != 0 else 0.0
    return math.inf if left > 0 else 0.0


def _constant_value(node: ExpressionAst):
    """Valor de uma subárvore sem x, ou None"""
    if isinstance(node, Var):
        return None
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Unary):
        if _constant_value(node.arg) is None:
            return None
    elif _constant_value(node.left) is None or _constant_value(node.right) is None:
        return None
    return float(evaluate_expression(node, np.zeros(1))[0])
