"""Analytic expression language for scalar and vector fields.

Fields are immutable expression trees over a fixed ordered variable list
(by default the Darboux coordinates ``x1..xn, y1..yn, z``).  Trees compile
once to a Python closure evaluable on floats or on dual numbers, so the
same object provides values, gradients and Hessians.

Grammar (also documented in the README)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?            # right associative
    atom    := NUMBER | IDENT | IDENT "(" expr ")" | "$" IDENT | "(" expr ")"

Known functions: ``exp``, ``log``, ``sin``, ``cos``.  Parameters ``$name``
are substituted at parse time from a parameter map.
"""

from __future__ import annotations

import re as _regex

from . import autodiff
from .errors import ArityError, ExprSyntaxError, UnknownIdentifierError

_FUNCTIONS = ("exp", "log", "sin", "cos")


# ---------------------------------------------------------------------------
# AST


class Node:
    __slots__ = ()


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)


class Var(Node):
    __slots__ = ("index",)

    def __init__(self, index):
        self.index = index


class BinOp(Node):
    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        self.op = op  # one of "+", "-", "*", "/", "^"
        self.left = left
        self.right = right


class Neg(Node):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg


class Call(Node):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        self.name = name
        self.arg = arg


_PY_OP = {"+": "+", "-": "-", "*": "*", "/": "/", "^": "**"}


def _emit(node):
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"c[{node.index}]"
    if isinstance(node, BinOp):
        return f"({_emit(node.left)} {_PY_OP[node.op]} {_emit(node.right)})"
    if isinstance(node, Neg):
        return f"(-{_emit(node.arg)})"
    if isinstance(node, Call):
        return f"{node.name}({_emit(node.arg)})"
    raise TypeError(f"unexpected node {node!r}")


def _compile(node):
    src = f"def _f(c):\n    return {_emit(node)}\n"
    ns = {name: getattr(autodiff, name) for name in _FUNCTIONS}
    exec(src, ns)
    return ns["_f"]


def _compile_tuple(nodes):
    body = ", ".join(_emit(n) for n in nodes)
    src = f"def _f(c):\n    return ({body},)\n"
    ns = {name: getattr(autodiff, name) for name in _FUNCTIONS}
    exec(src, ns)
    return ns["_f"]


# ---------------------------------------------------------------------------
# Symbolic differentiation.  Smart constructors fold constants so the
# derivative trees stay small enough to evaluate in inner loops.


def _c(node):
    return node.value if isinstance(node, Const) else None


def _add(a, b):
    if _c(a) == 0.0:
        return b
    if _c(b) == 0.0:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _sub(a, b):
    if _c(b) == 0.0:
        return a
    if _c(a) == 0.0:
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a, b):
    if _c(a) == 0.0 or _c(b) == 0.0:
        return Const(0.0)
    if _c(a) == 1.0:
        return b
    if _c(b) == 1.0:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def _div(a, b):
    if _c(a) == 0.0:
        return Const(0.0)
    if _c(b) == 1.0:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def _pow(a, b):
    if _c(b) == 1.0:
        return a
    if _c(b) == 0.0:
        return Const(1.0)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value ** b.value)
    return BinOp("^", a, b)


def _derivative(node, index):
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0 if node.index == index else 0.0)
    if isinstance(node, Neg):
        return _neg(_derivative(node.arg, index))
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da = _derivative(a, index)
        db = _derivative(b, index)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if node.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Const(2.0)))
        if isinstance(b, Const):
            return _mul(_mul(b, _pow(a, Const(b.value - 1.0))), da)
        # general a^b: a^b (db log a + b da / a)
        return _mul(node, _add(_mul(db, Call("log", a)), _div(_mul(b, da), a)))
    if isinstance(node, Call):
        da = _derivative(node.arg, index)
        if node.name == "exp":
            return _mul(node, da)
        if node.name == "log":
            return _div(da, node.arg)
        if node.name == "sin":
            return _mul(Call("cos", node.arg), da)
        if node.name == "cos":
            return _mul(_neg(Call("sin", node.arg)), da)
    raise TypeError(f"unexpected node {node!r}")


# precedence levels for the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _unparse(node, varnames, parent_prec=0):
    if isinstance(node, Const):
        v = node.value
        s = str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)
        if v < 0 and parent_prec > 0:
            return f"({s})"
        return s
    if isinstance(node, Var):
        return varnames[node.index]
    if isinstance(node, Neg):
        s = "-" + _unparse(node.arg, varnames, 3)
        return f"({s})" if parent_prec > 3 else s
    if isinstance(node, Call):
        return f"{node.name}({_unparse(node.arg, varnames, 0)})"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        if node.op == "^":
            # right associative; the right operand sits at unary level
            s = (_unparse(node.left, varnames, p + 1) + "^"
                 + _unparse(node.right, varnames, 3))
        else:
            s = (_unparse(node.left, varnames, p) + f" {node.op} "
                 + _unparse(node.right, varnames, p + 1))
        return f"({s})" if parent_prec > p else s
    raise TypeError(f"unexpected node {node!r}")


def _used_variables(node, out):
    if isinstance(node, Var):
        out.add(node.index)
    elif isinstance(node, BinOp):
        _used_variables(node.left, out)
        _used_variables(node.right, out)
    elif isinstance(node, Neg):
        _used_variables(node.arg, out)
    elif isinstance(node, Call):
        _used_variables(node.arg, out)
    return out


def _substitute(node, mapping):
    """Replace variables according to ``mapping``: index -> Node.

    Rebuilding through the folding constructors keeps pinned-variable
    residue (0 * f, x^0, additions of 0) out of the result.
    """
    if isinstance(node, Const):
        return node
    if isinstance(node, Var):
        return mapping[node.index]
    if isinstance(node, BinOp):
        left = _substitute(node.left, mapping)
        right = _substitute(node.right, mapping)
        build = {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}
        return build[node.op](left, right)
    if isinstance(node, Neg):
        return _neg(_substitute(node.arg, mapping))
    if isinstance(node, Call):
        arg = _substitute(node.arg, mapping)
        if isinstance(arg, Const):
            return Const(getattr(autodiff, node.name)(arg.value))
        return Call(node.name, arg)
    raise TypeError(f"unexpected node {node!r}")


# ---------------------------------------------------------------------------
# Fields


class ScalarField:
    """Differentiable map from coordinates to a real number.

    Backed either by an expression tree (parseable, printable,
    substitutable) or by an opaque callable that must accept dual inputs.
    """

    __slots__ = ("nvars", "varnames", "root", "_fn", "_vg")

    def __init__(self, nvars, varnames, root=None, fn=None):
        self.nvars = nvars
        self.varnames = tuple(varnames)
        self.root = root
        self._fn = _compile(root) if root is not None else fn
        self._vg = None

    @classmethod
    def native(cls, fn, nvars, varnames=None):
        names = varnames if varnames is not None else tuple(
            f"v{i}" for i in range(nvars))
        return cls(nvars, names, fn=fn)

    @classmethod
    def constant(cls, value, nvars, varnames=None):
        names = varnames if varnames is not None else tuple(
            f"v{i}" for i in range(nvars))
        return cls(nvars, names, root=Const(value))

    @classmethod
    def coordinate(cls, index, nvars, varnames=None):
        names = varnames if varnames is not None else tuple(
            f"v{i}" for i in range(nvars))
        return cls(nvars, names, root=Var(index))

    @property
    def is_expression(self):
        return self.root is not None

    def __call__(self, coords):
        return self._fn(coords)

    def _fused(self):
        """Compiled map coords -> (value, d/dc_0, ..., d/dc_{nvars-1})."""
        if self._vg is None:
            nodes = [self.root] + [_derivative(self.root, i)
                                   for i in range(self.nvars)]
            self._vg = _compile_tuple(nodes)
        return self._vg

    def value_and_grad(self, coords):
        if self.root is not None:
            out = self._fused()(coords)
            return out[0], list(out[1:])
        return autodiff.value_and_grad(self._fn, coords)

    def grad(self, coords):
        return self.value_and_grad(coords)[1]

    def hessian(self, coords):
        return self.value_grad_hessian(coords)[2]

    def value_grad_hessian(self, coords):
        if self.root is not None:
            # one dual layer over the symbolic gradient
            n = self.nvars
            out = self._fused()(autodiff.seed(list(coords)))
            hess = [list(autodiff._eps(o, n)) for o in out[1:]]
            return (autodiff._re(out[0]),
                    [autodiff._re(o) for o in out[1:]], hess)
        return autodiff.value_grad_hessian(self._fn, coords)

    def used_variables(self):
        """Indices of variables the expression actually mentions.

        Opaque native fields conservatively report every variable.
        """
        if self.root is None:
            return set(range(self.nvars))
        return _used_variables(self.root, set())

    def substitute(self, assignments, keep, new_varnames=None):
        """Pin some variables to constants and reindex the rest.

        ``assignments`` maps old variable indices to numbers; ``keep`` lists
        the old indices that survive, in their new order.
        """
        if self.root is None:
            raise TypeError("cannot substitute into an opaque native field")
        mapping = {i: Const(v) for i, v in assignments.items()}
        for new, old in enumerate(keep):
            mapping[old] = Var(new)
        names = new_varnames if new_varnames is not None else tuple(
            self.varnames[i] for i in keep)
        return ScalarField(len(keep), names,
                           root=_substitute(self.root, mapping))

    def __str__(self):
        if self.root is None:
            return f"<native field of {self.nvars} variables>"
        return _unparse(self.root, self.varnames)


class VectorField:
    """A tuple of scalar components over a shared variable list."""

    __slots__ = ("components", "nvars")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ArityError("vector field needs at least one component")
        self.components = components
        self.nvars = components[0].nvars

    @property
    def dim(self):
        return len(self.components)

    def __call__(self, coords):
        return [c(coords) for c in self.components]

    def jacobian(self, coords):
        return autodiff.jacobian(self.__call__, coords)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


# ---------------------------------------------------------------------------
# Combinators used to assemble brackets and monitors as fields


def field_product(f, g):
    fn_f, fn_g = f._fn, g._fn
    return ScalarField.native(lambda c: fn_f(c) * fn_g(c), f.nvars, f.varnames)


def field_sum(f, g):
    fn_f, fn_g = f._fn, g._fn
    return ScalarField.native(lambda c: fn_f(c) + fn_g(c), f.nvars, f.varnames)


# ---------------------------------------------------------------------------
# Parser


_TOKEN = _regex.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<param>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", _regex.VERBOSE)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens, varindex, params):
        self.tokens = tokens
        self.i = 0
        self.varindex = varindex
        self.params = params

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, pos = self.next()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text!r}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            return BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, text, pos = self.next()
        if kind == "number":
            return Const(float(text))
        if kind == "param":
            name = text[1:]
            if name not in self.params:
                raise UnknownIdentifierError(text, pos)
            return Const(float(self.params[name]))
        if kind == "ident":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in _FUNCTIONS:
                    raise UnknownIdentifierError(text, pos)
                self.next()
                arg = self.expr()
                k, t, p = self.peek()
                if k == "op" and t == ",":
                    raise ArityError(
                        f"function {text!r} takes exactly one argument")
                self.expect_op(")")
                return Call(text, arg)
            if text in self.varindex:
                return Var(self.varindex[text])
            raise UnknownIdentifierError(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text!r}", pos)


def darboux_varnames(n):
    """The fixed coordinate order x1..xn, y1..yn, z."""
    return tuple([f"x{i + 1}" for i in range(n)]
                 + [f"y{i + 1}" for i in range(n)] + ["z"])


def parse_field(source, chart=None, variables=None, params=None):
    """Parse an expression into a :class:`ScalarField`.

    Variables come from ``chart`` (Darboux names) or an explicit ordered
    ``variables`` list; ``params`` supplies values for ``$name`` references.
    """
    if variables is None:
        if chart is None:
            raise ValueError("either chart or variables must be given")
        variables = darboux_varnames(chart.n)
    variables = tuple(variables)
    varindex = {name: i for i, name in enumerate(variables)}
    root = _Parser(_tokenize(source), varindex, dict(params or {})).parse()
    return ScalarField(len(variables), variables, root=root)


def parse_vector_field(sources, chart=None, variables=None, params=None):
    return VectorField([parse_field(s, chart, variables, params)
                        for s in sources])
