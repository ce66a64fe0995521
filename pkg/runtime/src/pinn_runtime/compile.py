"""Compile prefix expressions into torch source fragments.

Field derivatives become calls to the rendered `partial` autodiff helper;
coordinate symbols index columns of the collocation tensor.
"""

from __future__ import annotations

import math

from .sexpr import Node, SexprError

KNOWN_CONSTANTS = {"pi": math.pi, "e": math.e}


class CompileError(ValueError):
    pass


class CoordinateLayout:
    """Column order: sorted spatial axes, then time last when present."""

    def __init__(self, axes: list[str], has_time: bool):
        self.axes = list(axes)
        self.has_time = has_time

    @property
    def dim(self) -> int:
        return len(self.axes) + (1 if self.has_time else 0)

    def column(self, name: str) -> int:
        if name == "t":
            if not self.has_time:
                raise CompileError("time coordinate referenced in a steady problem")
            return len(self.axes)
        if name in self.axes:
            return self.axes.index(name)
        raise CompileError(f"unknown coordinate {name!r}")


def emit(node: Node, layout: CoordinateLayout, allow_field: bool = True) -> str:
    """Torch expression over names `u`, `coords`, `partial` and `torch`."""
    if node.head == "num":
        return repr(node.value)
    if node.head == "var":
        name = str(node.args[0])
        if not allow_field:
            raise CompileError(f"field {name!r} not allowed in this expression")
        if name != "u":
            raise CompileError(f"only single-field residuals are supported, found {name!r}")
        return "u"
    if node.head == "const":
        name = str(node.args[0])
        if name in KNOWN_CONSTANTS:
            return repr(KNOWN_CONSTANTS[name])
        if name == "t" or name in layout.axes:
            return f"coords[:, {layout.column(name)}]"
        raise CompileError(f"unknown symbol {name!r} in expression")
    if node.head == "dt":
        order = int(float(str(node.args[0]))) if not isinstance(node.args[0], Node) else int(node.args[0].value)
        target = node.args[1]
        _require_field_target(target)
        return f"partial(u, coords, {layout.column('t')}, {order})"
    if node.head == "d":
        axis = str(node.args[0])
        order_arg = node.args[1]
        order = int(order_arg.value) if isinstance(order_arg, Node) else int(float(order_arg))
        _require_field_target(node.args[2])
        return f"partial(u, coords, {layout.column(axis)}, {order})"
    if node.head == "+":
        return "(" + " + ".join(emit(a, layout, allow_field) for a in node.args) + ")"
    if node.head == "*":
        return "(" + " * ".join(emit(a, layout, allow_field) for a in node.args) + ")"
    if node.head == "^":
        base, exponent = node.args
        return f"({emit(base, layout, allow_field)}) ** ({emit(exponent, layout, allow_field)})"
    if node.head in ("sin", "cos", "exp", "log"):
        return f"torch.{node.head}({emit(node.args[0], layout, allow_field)})"
    raise CompileError(f"unsupported expression head {node.head!r}")


def _require_field_target(target) -> None:
    if not isinstance(target, Node) or target.head != "var":
        raise CompileError("derivatives must apply directly to the unknown field")
    if str(target.args[0]) != "u":
        raise CompileError("only derivatives of field 'u' are supported")


def emit_coordinate_expression(text: str, layout: CoordinateLayout) -> str:
    """Compile a bc/ic value expression (no field references allowed)."""
    from .sexpr import parse

    stripped = text.strip()
    if not stripped.startswith("("):
        try:
            return repr(float(stripped))
        except ValueError as err:
            raise CompileError(
                f"boundary value {text!r} must be a number or prefix expression"
            ) from err
    return emit(parse(stripped), layout, allow_field=False)
