"""Truncated bivariate Taylor arithmetic (forward-mode jets in ``u``, ``v``).

A :class:`Jet` of order ``k`` carries a value together with every partial
derivative of total degree ``<= k``.  Values may be scalars or numpy arrays
(vectors, matrices); arithmetic acts elementwise on the value axes, and
``@`` multiplies matrix-valued jets.  This is how the flat ambient
connection is realised throughout the package: a parametrized map is
evaluated once as a jet and all of its derivatives come out exactly.

Internally coefficients are stored Taylor-normalized (``d^(i+j) f / (i! j!)``)
in triangular layout, ordered by total degree and then by ascending ``i``.
The public :attr:`Jet.coefficients` returns raw partial derivatives in the
same layout.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import expr as ex
from .errors import JetDomainError

DEFAULT_ORDER = 4


@lru_cache(maxsize=None)
def multi_indices(order: int) -> tuple[tuple[int, int], ...]:
    """(i, j) pairs in storage order: total degree first, then ascending i."""
    return tuple((i, d - i) for d in range(order + 1) for i in range(d + 1))


def n_coefficients(order: int) -> int:
    return (order + 1) * (order + 2) // 2


@lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, int], int]:
    return {ij: n for n, ij in enumerate(multi_indices(order))}


@lru_cache(maxsize=None)
def _product_table(order: int):
    """Index triples (a, b, c) with mono(a) * mono(b) = mono(c), plus the
    summation matrix that folds the triples back onto c."""
    idx = _index(order)
    mons = multi_indices(order)
    a_list, b_list, c_list = [], [], []
    for a, (i1, j1) in enumerate(mons):
        for b, (i2, j2) in enumerate(mons):
            if i1 + j1 + i2 + j2 <= order:
                a_list.append(a)
                b_list.append(b)
                c_list.append(idx[(i1 + i2, j1 + j2)])
    fold = np.zeros((len(mons), len(a_list)))
    fold[c_list, np.arange(len(a_list))] = 1.0
    return np.array(a_list), np.array(b_list), fold


@lru_cache(maxsize=None)
def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(i) * math.factorial(j) for i, j in multi_indices(order)], dtype=float)


@lru_cache(maxsize=None)
def _derivative_map(order: int, di: int, dj: int):
    """Source indices and factors for d^(di+dj)/du^di dv^dj of an order-`order` jet."""
    src = _index(order)
    out_order = order - di - dj
    sources, factors = [], []
    for i, j in multi_indices(out_order):
        sources.append(src[(i + di, j + dj)])
        factors.append(math.perm(i + di, di) * math.perm(j + dj, dj))
    return np.array(sources, dtype=int), np.array(factors, dtype=float)


def _expand(arr: np.ndarray, ndim: int) -> np.ndarray:
    """Insert axes right after the coefficient axis so value shapes broadcast."""
    extra = ndim - (arr.ndim - 1)
    if extra <= 0:
        return arr
    return arr.reshape(arr.shape[:1] + (1,) * extra + arr.shape[1:])


def _fold(fold: np.ndarray, prods: np.ndarray) -> np.ndarray:
    flat = prods.reshape(prods.shape[0], -1)
    return (fold @ flat).reshape(fold.shape[:1] + prods.shape[1:])


class Jet:
    """Value plus all partial derivatives up to ``order`` in (u, v)."""

    __slots__ = ("order", "taylor")
    __array_priority__ = 100

    def __init__(self, taylor, order: int):
        taylor = np.asarray(taylor, dtype=float)
        if taylor.shape[0] != n_coefficients(order):
            raise ValueError(f"expected {n_coefficients(order)} coefficients for order {order}, got {taylor.shape[0]}")
        self.order = order
        self.taylor = taylor

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, order: int) -> Jet:
        value = np.asarray(value, dtype=float)
        taylor = np.zeros((n_coefficients(order),) + value.shape)
        taylor[0] = value
        return cls(taylor, order)

    @classmethod
    def variable(cls, which: int, value: float, order: int) -> Jet:
        """The coordinate function u (which=0) or v (which=1)."""
        taylor = np.zeros(n_coefficients(order))
        taylor[0] = value
        if order >= 1:
            taylor[_index(order)[(1, 0) if which == 0 else (0, 1)]] = 1.0
        return cls(taylor, order)

    @classmethod
    def from_partials(cls, partials, order: int) -> Jet:
        partials = np.asarray(partials, dtype=float)
        fact = _expand(_factorials(order), partials.ndim - 1)
        return cls(partials / fact, order)

    @staticmethod
    def stack(jets, axis: int = -1) -> Jet:
        jets = [j for j in jets]
        order = min(j.order for j in jets if isinstance(j, Jet))
        jets = [_lift(j, order) for j in jets]
        arrays = [j.taylor for j in jets]
        ndim = arrays[0].ndim
        ax = axis + ndim + 1 if axis < 0 else axis + 1
        return Jet(np.stack(arrays, axis=ax), order)

    # -- inspection ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.taylor.shape[1:]

    @property
    def value(self):
        v = self.taylor[0]
        return float(v) if v.ndim == 0 else v.copy()

    def partial(self, i: int, j: int):
        if i + j > self.order:
            raise ValueError(f"partial ({i},{j}) exceeds jet order {self.order}")
        v = self.taylor[_index(self.order)[(i, j)]] * math.factorial(i) * math.factorial(j)
        return float(v) if np.ndim(v) == 0 else v

    @property
    def coefficients(self) -> np.ndarray:
        """Raw partial derivatives in storage order."""
        return self.taylor * _expand(_factorials(self.order), self.taylor.ndim - 1)

    def is_constant(self) -> bool:
        return not np.any(self.taylor[1:])

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.value!r})"

    # -- structural ---------------------------------------------------------

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(self.taylor[: n_coefficients(order)], order)

    def d(self, di: int = 0, dj: int = 0) -> Jet:
        """Partial derivative as a jet of order ``order - di - dj``."""
        if di + dj == 0:
            return self
        if di + dj > self.order:
            raise ValueError(f"derivative of order {di + dj} exceeds jet order {self.order}")
        src, fac = _derivative_map(self.order, di, dj)
        return Jet(self.taylor[src] * _expand(fac, self.taylor.ndim - 1), self.order - di - dj)

    @property
    def du(self) -> Jet:
        return self.d(1, 0)

    @property
    def dv(self) -> Jet:
        return self.d(0, 1)

    def __getitem__(self, key) -> Jet:
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.taylor[(slice(None),) + key], self.order)

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @property
    def T(self) -> Jet:
        return Jet(np.swapaxes(self.taylor, -1, -2), self.order)

    def sum(self, axis: int = -1) -> Jet:
        ax = axis + self.taylor.ndim if axis < 0 else axis + 1
        return Jet(self.taylor.sum(axis=ax), self.order)

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return Jet(-self.taylor, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = _coerce(self, other)
        nd = max(a.taylor.ndim, b.taylor.ndim) - 1
        return Jet(_expand(a.taylor, nd) + _expand(b.taylor, nd), a.order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = _coerce(self, other)
        nd = max(a.taylor.ndim, b.taylor.ndim) - 1
        return Jet(_expand(a.taylor, nd) - _expand(b.taylor, nd), a.order)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            nd = max(self.taylor.ndim - 1, c.ndim)
            return Jet(_expand(self.taylor, nd) * c, self.order)
        a, b = _coerce(self, other)
        ia, ib, fold = _product_table(a.order)
        nd = max(a.taylor.ndim, b.taylor.ndim) - 1
        prods = _expand(a.taylor[ia], nd) * _expand(b.taylor[ib], nd)
        return Jet(_fold(fold, prods), a.order)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.taylor @ np.asarray(other, dtype=float), self.order)
        a, b = _coerce(self, other)
        ia, ib, fold = _product_table(a.order)
        prods = a.taylor[ia] @ b.taylor[ib]
        return Jet(_fold(fold, prods), a.order)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        return Jet(other @ self.taylor, self.order)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            if np.any(c == 0):
                raise JetDomainError("division by zero")
            return self * (1.0 / c)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            if p.is_constant():
                return self.power(p.value)
            return (p * self.log()).exp()
        return self.power(p)

    # -- elementary functions ------------------------------------------------

    def _compose(self, coeffs) -> Jet:
        """Evaluate sum_n coeffs[n] * (self - value)^n by Horner's scheme."""
        delta = Jet(self.taylor.copy(), self.order)
        delta.taylor[0] = 0.0
        top = min(self.order, len(coeffs) - 1)
        result = Jet.constant(coeffs[top], self.order)
        for n in range(top - 1, -1, -1):
            result = result * delta + coeffs[n]
        return result

    def reciprocal(self) -> Jet:
        x0 = self.taylor[0]
        if np.any(x0 == 0):
            raise JetDomainError("division by zero at the evaluation point")
        coeffs = [(-1.0) ** n / x0 ** (n + 1) for n in range(self.order + 1)]
        return self._compose(coeffs)

    def power(self, p: float) -> Jet:
        p = float(p)
        x0 = self.taylor[0]
        integral = p.is_integer()
        if integral and p >= 0:
            n_max = min(self.order, int(p))
            coeffs = [math.comb(int(p), n) * x0 ** (int(p) - n) for n in range(n_max + 1)]
            return self._compose(coeffs)
        if integral:
            if np.any(x0 == 0):
                raise JetDomainError("negative power of zero")
        elif np.any(x0 < 0) or (np.any(x0 == 0) and (self.order > 0 or p < 0)):
            raise JetDomainError(f"non-integer power {p} of a non-positive base")
        if np.any(x0 == 0):  # only reachable at order 0 with p > 0
            return Jet.constant(x0 ** p, self.order)
        coeffs = [_binom(p, n) * x0 ** (p - n) for n in range(self.order + 1)]
        return self._compose(coeffs)

    def exp(self) -> Jet:
        e = np.exp(self.taylor[0])
        return self._compose([e / math.factorial(n) for n in range(self.order + 1)])

    def log(self) -> Jet:
        x0 = self.taylor[0]
        if np.any(x0 <= 0):
            raise JetDomainError(f"log of non-positive value {x0}")
        coeffs = [np.log(x0)] + [(-1.0) ** (n + 1) / (n * x0 ** n) for n in range(1, self.order + 1)]
        return self._compose(coeffs)

    def sqrt(self) -> Jet:
        x0 = self.taylor[0]
        if np.any(x0 < 0) or (np.any(x0 == 0) and self.order > 0):
            raise JetDomainError(f"sqrt of non-positive value {x0}")
        return self.power(0.5)

    def sin(self) -> Jet:
        s, c = np.sin(self.taylor[0]), np.cos(self.taylor[0])
        cycle = (s, c, -s, -c)
        return self._compose([cycle[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def cos(self) -> Jet:
        s, c = np.sin(self.taylor[0]), np.cos(self.taylor[0])
        cycle = (c, -s, -c, s)
        return self._compose([cycle[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def tan(self) -> Jet:
        c = self.cos()
        if np.any(c.taylor[0] == 0):
            raise JetDomainError("tan at a pole")
        return self.sin() / c

    def atan(self) -> Jet:
        x0 = self.taylor[0]
        # atan' = 1 / q with q = (1 + x0^2) + 2 x0 t + t^2
        q0, q1 = 1.0 + x0 * x0, 2.0 * x0
        r = [1.0 / q0]
        for n in range(1, self.order):
            prev2 = r[n - 2] if n >= 2 else 0.0
            r.append(-(q1 * r[n - 1] + prev2) / q0)
        coeffs = [np.arctan(x0)] + [r[n - 1] / n for n in range(1, self.order + 1)]
        return self._compose(coeffs)

    # -- linear algebra on matrix-valued jets ---------------------------------

    def inv(self) -> Jet:
        """Inverse of a square-matrix-valued jet via the Neumann series."""
        a0 = self.taylor[0]
        try:
            a0_inv = np.linalg.inv(a0)
        except np.linalg.LinAlgError as exc:
            raise JetDomainError("matrix jet is singular at the evaluation point") from exc
        nil = Jet(self.taylor.copy(), self.order)
        nil.taylor[0] = 0.0
        step = -(Jet.constant(a0_inv, self.order) @ nil)
        result = Jet.constant(np.eye(a0.shape[-1]), self.order)
        term = result
        for _ in range(self.order):
            term = step @ term
            result = result + term
        return result @ a0_inv


def _binom(p: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= (p - k) / (k + 1)
    return out


def _lift(x, order: int) -> Jet:
    if isinstance(x, Jet):
        return x.truncate(order)
    return Jet.constant(x, order)


def _coerce(a, b) -> tuple[Jet, Jet]:
    if isinstance(a, Jet) and isinstance(b, Jet):
        order = min(a.order, b.order)
        return a.truncate(order), b.truncate(order)
    if isinstance(a, Jet):
        return a, Jet.constant(b, a.order)
    return Jet.constant(a, b.order), b


def dot(a: Jet, b: Jet) -> Jet:
    """Contraction over the last value axis."""
    return (a * b).sum(-1)


def cross(a: Jet, b: Jet) -> Jet:
    return Jet.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def det3(a: Jet, b: Jet, c: Jet) -> Jet:
    return dot(cross(a, b), c)


_FUNCS = {
    "sin": Jet.sin,
    "cos": Jet.cos,
    "tan": Jet.tan,
    "exp": Jet.exp,
    "log": Jet.log,
    "sqrt": Jet.sqrt,
    "atan": Jet.atan,
}


def _constant_value(node: ex.Expression) -> float:
    return evaluate_jet(node, (0.0, 0.0), 0).value


def evaluate_jet(e: ex.Expression | str, at, order: int = DEFAULT_ORDER) -> Jet:
    """Evaluate ``e`` at ``at = (u, v)`` with all partials up to ``order``."""
    e = ex.as_expression(e)
    u, v = float(at[0]), float(at[1])
    env = {"u": Jet.variable(0, u, order), "v": Jet.variable(1, v, order)}
    return _eval(e, env, order)


def _eval(node, env, order):
    if isinstance(node, ex.Num):
        return Jet.constant(node.value, order)
    if isinstance(node, ex.Var):
        return env[node.name]
    if isinstance(node, ex.Pi):
        return Jet.constant(math.pi, order)
    if isinstance(node, ex.Neg):
        return -_eval(node.operand, env, order)
    if isinstance(node, ex.Call):
        return _FUNCS[node.func](_eval(node.arg, env, order))
    if isinstance(node, ex.Pow):
        base = _eval(node.left, env, order)
        if node.right.is_constant():
            return base.power(_constant_value(node.right))
        return (_eval(node.right, env, order) * base.log()).exp()
    left = _eval(node.left, env, order)
    right = _eval(node.right, env, order)
    if isinstance(node, ex.Add):
        return left + right
    if isinstance(node, ex.Sub):
        return left - right
    if isinstance(node, ex.Mul):
        return left * right
    if isinstance(node, ex.Div):
        return left / right
    raise TypeError(f"unknown node {node!r}")


def evaluate(e: ex.Expression | str, at) -> float:
    return evaluate_jet(e, at, 0).value


def evaluate_vector(exprs, at, order: int = DEFAULT_ORDER) -> Jet:
    return Jet.stack([evaluate_jet(e, at, order) for e in exprs])
