"""
Recursive-descent parser for scalar-field expressions.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ['^' unary]          # right-associative
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Exponents must fold to an integer constant. There is no implicit
multiplication, so ``2x`` is rejected.

Example:
    >>> from morselab.expr import parse, evaluate
    >>> e = parse("x^4 + y^2", ["x", "y"])
    >>> float(evaluate(e, np.array([2.0, 1.0])))
    17.0
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .calculus import simplify
from .nodes import FUNCTIONS, Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sub, Var
from ..exceptions import InputError, ParseError, UnknownFunctionError, UnknownIdentifierError

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_NAME_RE = re.compile(r"^[A-Za-z_]\w*$")


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, eof
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    """Split an expression into tokens, ending with an `eof` token."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.lastgroup is None:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"Unexpected character '{text[offset]}'", offset, text)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.variables = {name: i for i, name in enumerate(variables)}

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != "eof":
            self.index += 1
        return token

    def _accept(self, op: str) -> Optional[Token]:
        if self.current.kind == "op" and self.current.text == op:
            return self._advance()
        return None

    def _expect(self, op: str) -> Token:
        token = self._accept(op)
        if token is None:
            raise self._unexpected(f"Expected '{op}'")
        return token

    def _unexpected(self, message: Optional[str] = None) -> ParseError:
        token = self.current
        if message is None:
            if token.kind == "eof":
                message = "Unexpected end of expression"
            else:
                message = f"Unexpected token '{token.text}'"
        return ParseError(message, token.position, self.text)

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "eof":
            raise self._unexpected()
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            if self._accept("+"):
                node = Add(node, self.term())
            elif self._accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            if self._accept("*"):
                node = Mul(node, self.unary())
            elif self._accept("/"):
                node = Div(node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        if self._accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if not self._accept("^"):
            return base
        position = self.current.position
        exponent = simplify(self.unary())
        if not isinstance(exponent, Const) or not float(exponent.value).is_integer():
            raise ParseError("Exponent must be an integer constant", position, self.text)
        return Pow(base, int(exponent.value))

    def primary(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Const(float(token.text))
        if token.kind == "name":
            self._advance()
            if self.current.kind == "op" and self.current.text == "(":
                if token.text not in FUNCTIONS:
                    raise UnknownFunctionError(token.text, token.position, self.text)
                self._advance()
                arg = self.expr()
                self._expect(")")
                return Call(token.text, arg)
            if token.text in self.variables:
                return Var(self.variables[token.text], token.text)
            if token.text in FUNCTIONS:
                raise self._unexpected(f"Expected '(' after function '{token.text}'")
            raise UnknownIdentifierError(token.text, token.position, self.text)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        raise self._unexpected()


def validate_variables(variables: Sequence[str]) -> List[str]:
    """Check that variable names are distinct identifiers that do not shadow functions."""
    names = list(variables)
    if not names:
        raise InputError("At least one variable is required", parameter="variables")
    for name in names:
        if not isinstance(name, str) or not _NAME_RE.match(name):
            raise InputError(f"Invalid variable name {name!r}", parameter="variables")
        if name in FUNCTIONS:
            raise InputError(f"Variable '{name}' shadows a function", parameter="variables")
    if len(set(names)) != len(names):
        raise InputError("Variable names must be distinct", parameter="variables")
    return names


def parse(text: str, variables: Sequence[str]) -> Expr:
    """
    Parse an expression over the given ordered variable names.

    Args:
        text: Expression string
        variables: Coordinate names; position i becomes variable index i

    Returns:
        Expression tree

    Raises:
        ParseError: Syntax error, with the character offset of the failure
        UnknownIdentifierError: Name that is neither variable nor function
        UnknownFunctionError: Call of an unsupported function
        InputError: Invalid variable list
    """
    names = validate_variables(variables)
    if not text or not text.strip():
        raise ParseError("Empty expression", 0, text or "")
    return _Parser(text, names).parse()
