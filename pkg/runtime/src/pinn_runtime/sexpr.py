"""Minimal reader for the bundle's prefix expression format.

Grammar: numbers are bare atoms; everything else is a parenthesized form:
(var NAME), (const NAME), (dt ORDER EXPR), (d AXIS ORDER EXPR),
(+ E...), (* E...), (^ BASE EXP), (sin|cos|exp|log E).
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class SexprError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    head: str                 # num | var | const | dt | d | + | * | ^ | function name
    args: tuple = ()          # strings (names/orders) and child Nodes
    value: float = 0.0


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
FUNCTIONS = ("sin", "cos", "exp", "log")


def parse(text: str) -> Node:
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise SexprError("empty expression")
    pos = 0

    def read() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise SexprError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise SexprError("unexpected ')'")
        if tok != "(":
            try:
                return Node("num", value=float(tok))
            except ValueError as err:
                raise SexprError(f"bare atom {tok!r} is not a number") from err
        head = tokens[pos]
        pos += 1
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "(":
                args.append(read())
            else:
                atom = tokens[pos]
                pos += 1
                try:
                    args.append(Node("num", value=float(atom)))
                except ValueError:
                    args.append(atom)
        if pos >= len(tokens):
            raise SexprError("missing ')'")
        pos += 1
        return Node(head, tuple(args))

    node = read()
    if pos != len(tokens):
        raise SexprError("trailing tokens")
    return node


def spatial_axes(node: Node) -> set[str]:
    axes = set()
    if node.head == "d":
        axes.add(str(node.args[0]))
    for a in node.args:
        if isinstance(a, Node):
            axes |= spatial_axes(a)
    return axes


def has_time_derivative(node: Node) -> bool:
    if node.head == "dt":
        return True
    return any(isinstance(a, Node) and has_time_derivative(a) for a in node.args)


def field_names(node: Node) -> set[str]:
    names = set()
    if node.head == "var":
        names.add(str(node.args[0]))
    for a in node.args:
        if isinstance(a, Node):
            names |= field_names(a)
    return names
