"""A small, safe expression language for weights h, b and custom kernels.

Grammar: numbers, the variables of the evaluation context (``x``, ``y`` for
node coordinates; ``z``, ``z1``, ``z2`` for kernel arguments; ``r`` for the
norm), the constant ``pi``, the operators ``+ - * / **`` and the functions
``sin cos exp sign abs sqrt min max``. Everything is evaluated with numpy
on whole arrays.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sign": np.sign,
    "abs": np.abs,
    "sqrt": np.sqrt,
    "min": np.minimum,
    "max": np.maximum,
}
_CONSTS = {"pi": np.pi}


class ExpressionError(ValueError):
    pass


class Expression:
    """Parsed expression; call with keyword arrays to evaluate.

    >>> Expression("2*x + 1")(x=np.array([0.0, 1.0]))
    array([1., 3.])
    """

    def __init__(self, source: str):
        self.source = str(source).strip()
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {self.source!r}: {exc.msg}") from None
        self._tree = tree.body
        self.names = set()
        self._check(self._tree)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"only numeric literals are allowed in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id not in _CONSTS:
                self.names.add(node.id)
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ExpressionError(f"unknown function in {self.source!r}")
            if node.keywords:
                raise ExpressionError("keyword arguments are not allowed")
            for arg in node.args:
                self._check(arg)
        else:
            raise ExpressionError(f"construct {type(node).__name__} not allowed in {self.source!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            return env[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        return _FUNCS[node.func.id](*(self._eval(a, env) for a in node.args))

    def __call__(self, **variables) -> np.ndarray:
        missing = self.names - variables.keys()
        if missing:
            raise ExpressionError(
                f"unknown variable(s) {sorted(missing)} in {self.source!r}; "
                f"available: {sorted(variables)}"
            )
        shape = np.broadcast_shapes(*(np.shape(v) for v in variables.values()))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._eval(self._tree, variables)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    def __repr__(self):
        return f"Expression({self.source!r})"


def sample_on_nodes(source: str, nodes: np.ndarray) -> np.ndarray:
    """Evaluate an expression in ``x`` (and ``y`` in 2D) at mesh nodes."""
    nodes = np.asarray(nodes, dtype=float)
    env = {"x": nodes[:, 0]}
    if nodes.shape[1] > 1:
        env["y"] = nodes[:, 1]
    vals = Expression(source)(**env)
    if not np.all(np.isfinite(vals)):
        raise ExpressionError(f"expression {source!r} is not finite on the mesh")
    return vals


def kernel_evaluator(source: str, n: int):
    """Build a vectorized kernel callable from an expression.

    Available variables: ``z`` (first coordinate), ``z1``, ``z2`` and ``r = |z|``.
    """
    expr = Expression(source)

    def evaluate(pts: np.ndarray) -> np.ndarray:
        env = {"z": pts[..., 0], "z1": pts[..., 0], "r": np.linalg.norm(pts, axis=-1)}
        if n > 1:
            env["z2"] = pts[..., 1]
        return expr(**env)

    evaluate.source = expr.source
    return evaluate
