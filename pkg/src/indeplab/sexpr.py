"""Canonical s-expression text used for statements, proofs and machine codes.

Atoms are either non-negative/negative integers or strings.  Strings are
always written quoted, so ``"0"`` and ``0`` never collide.  Lists are written
as ``(a b c)`` with single spaces.  ``dumps(loads(t)) == t`` for every text
produced by :func:`dumps`.
"""

from __future__ import annotations

from typing import Union

SExpr = Union[int, str, tuple]


class SExprError(ValueError):
    pass


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dumps(x: SExpr) -> str:
    if isinstance(x, bool):
        raise SExprError("booleans are not atoms")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return _quote(x)
    if isinstance(x, (tuple, list)):
        return "(" + " ".join(dumps(e) for e in x) + ")"
    raise SExprError(f"cannot serialize {type(x).__name__}")


def loads(text: str) -> SExpr:
    value, pos = _parse(text, 0)
    if pos != len(text):
        raise SExprError(f"trailing data at offset {pos}")
    return value


def _parse(text: str, pos: int) -> tuple[SExpr, int]:
    if pos >= len(text):
        raise SExprError("unexpected end of input")
    ch = text[pos]
    if ch == "(":
        items = []
        pos += 1
        if pos < len(text) and text[pos] == ")":
            return (), pos + 1
        while True:
            item, pos = _parse(text, pos)
            items.append(item)
            if pos >= len(text):
                raise SExprError("unterminated list")
            if text[pos] == ")":
                return tuple(items), pos + 1
            if text[pos] != " ":
                raise SExprError(f"expected space at offset {pos}")
            pos += 1
    if ch == '"':
        out = []
        pos += 1
        while pos < len(text):
            c = text[pos]
            if c == "\\":
                if pos + 1 >= len(text) or text[pos + 1] not in '\\"':
                    raise SExprError(f"bad escape at offset {pos}")
                out.append(text[pos + 1])
                pos += 2
            elif c == '"':
                return "".join(out), pos + 1
            else:
                out.append(c)
                pos += 1
        raise SExprError("unterminated string")
    end = pos
    if end < len(text) and text[end] == "-":
        end += 1
    while end < len(text) and text[end].isdigit():
        end += 1
    tok = text[pos:end]
    if not tok or tok == "-" or (tok.lstrip("-").startswith("0") and tok.lstrip("-") != "0") or tok == "-0":
        raise SExprError(f"bad atom at offset {pos}")
    return int(tok), end
