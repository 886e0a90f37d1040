# games/tags.py
from __future__ import annotations
import re
from dataclasses import dataclass
from typing import List, Optional, Union

from utils.errors import RatingSpecError

# Gramática:
#   expr  := term ('|' term)*
#   term  := unary ('&' unary)*
#   unary := '!' unary | atom
#   atom  := tag('x') | judge('llm') | '(' expr ')'
# Se aceptan también ∧ ∨ ¬.

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<call>(?:tag|judge))\s*\(\s*(?P<q>['"])(?P<arg>[^'"]*)(?P=q)\s*\)
      | (?P<op>[&|!()∧∨¬])
    )""",
    re.VERBOSE,
)
_OP_ALIASES = {"∧": "&", "∨": "|", "¬": "!"}


@dataclass(frozen=True)
class Tag:
    name: str

    def evaluate(self, game) -> bool:
        return self.name in game.tags

    def __str__(self) -> str:
        return f"tag('{self.name}')"


@dataclass(frozen=True)
class JudgeIs:
    kind: str

    def evaluate(self, game) -> bool:
        return game.judge.value == self.kind

    def __str__(self) -> str:
        return f"judge('{self.kind}')"


@dataclass(frozen=True)
class Not:
    inner: "TagExpr"

    def evaluate(self, game) -> bool:
        return not self.inner.evaluate(game)

    def __str__(self) -> str:
        return f"!{self.inner}"


@dataclass(frozen=True)
class And:
    left: "TagExpr"
    right: "TagExpr"

    def evaluate(self, game) -> bool:
        return self.left.evaluate(game) and self.right.evaluate(game)

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "TagExpr"
    right: "TagExpr"

    def evaluate(self, game) -> bool:
        return self.left.evaluate(game) or self.right.evaluate(game)

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


TagExpr = Union[Tag, JudgeIs, Not, And, Or]


def _tokenize(text: str, field: Optional[str]) -> List[tuple]:
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN_RE.match(stripped, pos)
        if not m:
            raise RatingSpecError(f"expresión de tags inválida cerca de '{stripped[pos:pos + 12]}'", field=field)
        if m.group("call"):
            tokens.append((m.group("call"), m.group("arg")))
        else:
            op = m.group("op")
            tokens.append(("op", _OP_ALIASES.get(op, op)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: List[tuple], field: Optional[str]):
        self.tokens = tokens
        self.i = 0
        self.field = field

    def _peek(self) -> Optional[tuple]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _take_op(self, op: str) -> bool:
        if self._peek() == ("op", op):
            self.i += 1
            return True
        return False

    def parse(self) -> TagExpr:
        expr = self._expr()
        if self._peek() is not None:
            raise RatingSpecError("expresión de tags con símbolos sobrantes", field=self.field)
        return expr

    def _expr(self) -> TagExpr:
        left = self._term()
        while self._take_op("|"):
            left = Or(left, self._term())
        return left

    def _term(self) -> TagExpr:
        left = self._unary()
        while self._take_op("&"):
            left = And(left, self._unary())
        return left

    def _unary(self) -> TagExpr:
        if self._take_op("!"):
            return Not(self._unary())
        return self._atom()

    def _atom(self) -> TagExpr:
        tok = self._peek()
        if tok is None:
            raise RatingSpecError("expresión de tags incompleta", field=self.field)
        if tok == ("op", "("):
            self.i += 1
            inner = self._expr()
            if not self._take_op(")"):
                raise RatingSpecError("falta ')' en la expresión de tags", field=self.field)
            return inner
        kind, arg = tok
        self.i += 1
        if kind == "tag":
            return Tag(arg)
        if kind == "judge":
            if arg not in ("human", "llm", "benchmark"):
                raise RatingSpecError(f"tipo de juez desconocido '{arg}'", field=self.field)
            return JudgeIs(arg)
        raise RatingSpecError(f"símbolo inesperado '{arg}'", field=self.field)


def parse_tag_expr(text: str, field: Optional[str] = None) -> TagExpr:
    """
    Convierte `tag('code') & !judge('llm')` en un árbol evaluable sobre una partida.
    """
    if not isinstance(text, str) or not text.strip():
        raise RatingSpecError("expresión de tags vacía", field=field)
    return _Parser(_tokenize(text, field), field).parse()
