"""Truncated second-order Taylor arithmetic and a reverse-mode gradient tape.

Two pieces live here:

* :class:`Dual2Scalar` carries ``(val, d1, d2)``, the value together with the
  first and pure second derivative along one seeded input direction. The
  fields may be numpy arrays, in which case the algebra is applied
  elementwise and ``d1``/``d2`` may carry an extra *leading* axis holding
  several seeded directions at once (``val`` broadcasts against it).
* :class:`GradTape` records primitive operations on :class:`Var` handles and
  computes the gradient of a scalar output with respect to all parameter
  slots in one reverse sweep. Payloads are plain arrays or
  :class:`Dual2Scalar` values; the dense/activation primitives differentiate
  the whole ``(val, d1, d2)`` triple, so losses built from input
  derivatives of a network get exact parameter gradients.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class StateError(RuntimeError):
    """Tape used in an invalid state (e.g. reverse sweep without output)."""


# ---------------------------------------------------------------------------
# forward-mode second-order algebra
# ---------------------------------------------------------------------------


class Dual2Scalar:
    """Value with first and second derivative along a seeded direction."""

    __slots__ = ("val", "d1", "d2")
    __array_ufunc__ = None  # keep numpy from swallowing reflected operators

    def __init__(self, val, d1=0.0, d2=0.0):
        self.val = val
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def constant(cls, c):
        return cls(c, 0.0, 0.0)

    @classmethod
    def seed(cls, x):
        return cls(x, 1.0, 0.0)

    def __repr__(self):
        return f"Dual2Scalar({self.val!r}, {self.d1!r}, {self.d2!r})"

    def astuple(self):
        return (self.val, self.d1, self.d2)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual2Scalar):
            return Dual2Scalar(self.val + other.val, self.d1 + other.d1, self.d2 + other.d2)
        return Dual2Scalar(self.val + other, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self):
        return Dual2Scalar(-self.val, -self.d1, -self.d2)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual2Scalar):
            return Dual2Scalar(
                self.val * other.val,
                self.d1 * other.val + self.val * other.d1,
                self.d2 * other.val + 2.0 * self.d1 * other.d1 + self.val * other.d2,
            )
        return Dual2Scalar(self.val * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def reciprocal(self):
        r = 1.0 / self.val
        r2 = r * r
        # f = 1/v: f' = -1/v^2, f'' = 2/v^3
        return _chain(self, r, -r2, 2.0 * r2 * r)

    def __truediv__(self, other):
        if isinstance(other, Dual2Scalar):
            return self * other.reciprocal()
        return Dual2Scalar(self.val / other, self.d1 / other, self.d2 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        if n == 0:
            return Dual2Scalar(np.ones_like(self.val) if isinstance(self.val, np.ndarray) else 1.0)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def square(self):
        return self * self


def _chain(a: Dual2Scalar, f0, f1, f2) -> Dual2Scalar:
    """Compose an elementwise function with value/derivatives f0, f1, f2 at a.val."""
    return Dual2Scalar(f0, f1 * a.d1, f1 * a.d2 + f2 * (a.d1 * a.d1))


def lift_seeded(x: Sequence[float], j: int) -> list[Dual2Scalar]:
    """Lift a point to Dual2 coordinates with coordinate ``j`` seeded."""
    x = list(x)
    if not 0 <= j < len(x):
        raise IndexError(f"seed coordinate {j} out of range for dimension {len(x)}")
    return [Dual2Scalar(float(v), 1.0 if i == j else 0.0, 0.0) for i, v in enumerate(x)]


def dual_tanh(a: Dual2Scalar) -> Dual2Scalar:
    t = np.tanh(a.val)
    s = 1.0 - t * t
    return Dual2Scalar(t, a.d1 * s, a.d2 * s - 2.0 * t * s * (a.d1 * a.d1))


def dual_sin(a: Dual2Scalar) -> Dual2Scalar:
    s, c = np.sin(a.val), np.cos(a.val)
    return _chain(a, s, c, -s)


def dual_cos(a: Dual2Scalar) -> Dual2Scalar:
    s, c = np.sin(a.val), np.cos(a.val)
    return _chain(a, c, -s, -c)


def dual_exp(a: Dual2Scalar) -> Dual2Scalar:
    e = np.exp(a.val)
    return _chain(a, e, e, e)


def dual_sigmoid(a: Dual2Scalar) -> Dual2Scalar:
    s = _sigmoid(a.val)
    p = s * (1.0 - s)
    return _chain(a, s, p, p * (1.0 - 2.0 * s))


def dual_affine(weights, inputs: Sequence, bias=0.0):
    """sum_i weights[i] * inputs[i] + bias for Dual2Scalar (or plain) inputs."""
    acc = bias
    for w, v in zip(weights, inputs):
        acc = v * w + acc
    return acc


def _sigmoid(z):
    # split by sign so exp never overflows
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


# math helpers dispatching over floats, arrays, Dual2Scalar and tape Vars

def sin(a):
    if isinstance(a, Dual2Scalar):
        return dual_sin(a)
    if isinstance(a, Var):
        return a.tape.sin(a)
    return np.sin(a)


def cos(a):
    if isinstance(a, Dual2Scalar):
        return dual_cos(a)
    if isinstance(a, Var):
        return a.tape.cos(a)
    return np.cos(a)


def exp(a):
    if isinstance(a, Dual2Scalar):
        return dual_exp(a)
    if isinstance(a, Var):
        return a.tape.exp(a)
    return np.exp(a)


def tanh(a):
    if isinstance(a, Dual2Scalar):
        return dual_tanh(a)
    if isinstance(a, Var):
        return a.tape.tanh(a)
    return np.tanh(a)


def sech(a):
    if isinstance(a, Dual2Scalar):
        c = np.cosh(a.val)
        s = 1.0 / c
        t = np.tanh(a.val)
        # sech' = -sech tanh, sech'' = sech (tanh^2 - sech^2)
        return _chain(a, s, -s * t, s * (t * t - s * s))
    return 1.0 / np.cosh(a)


# ---------------------------------------------------------------------------
# reverse-mode tape
# ---------------------------------------------------------------------------


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast cotangent back down to ``shape``."""
    g = np.asarray(g)
    if g.shape == tuple(shape):
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g.reshape(shape)


def _shape(v):
    return np.shape(v)


def _accumulate(a, b):
    if a is None:
        return b
    if isinstance(a, Dual2Scalar):
        return Dual2Scalar(a.val + b.val, a.d1 + b.d1, a.d2 + b.d2)
    return a + b


class Var:
    """Handle to a value recorded on a :class:`GradTape`."""

    __slots__ = ("tape", "index")
    __array_ufunc__ = None

    def __init__(self, tape: "GradTape", index: int):
        self.tape = tape
        self.index = index

    @property
    def value(self):
        return self.tape._values[self.index]

    @property
    def shape(self):
        return _shape(self.value)

    def __repr__(self):
        return f"Var(#{self.index}, shape={self.shape})"

    def __add__(self, o):
        return self.tape.add(self, o)

    def __radd__(self, o):
        return self.tape.add(o, self)

    def __sub__(self, o):
        return self.tape.sub(self, o)

    def __rsub__(self, o):
        return self.tape.sub(o, self)

    def __mul__(self, o):
        return self.tape.mul(self, o)

    def __rmul__(self, o):
        return self.tape.mul(o, self)

    def __truediv__(self, o):
        return self.tape.div(self, o)

    def __rtruediv__(self, o):
        return self.tape.div(o, self)

    def __neg__(self):
        return self.tape.neg(self)

    def __pow__(self, n):
        if n == 2:
            return self.tape.square(self)
        if isinstance(n, int) and n >= 1:
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        raise TypeError("only positive integer powers are supported on tape variables")

    def __getitem__(self, key):
        return self.tape.getitem(self, key)


class GradTape:
    """Linear record of primitive operations with a single reverse sweep.

    Parameters are registered with :meth:`param`; :meth:`gradient` returns the
    concatenation of their flattened cotangents in registration order.
    Accumulation happens in strict reverse recording order, so replaying the
    same construction gives bit-identical gradients.
    """

    def __init__(self):
        self._values: list = []
        self._parents: list[tuple[int, ...]] = []
        self._vjps: list[Callable | None] = []
        self._needs: list[bool] = []
        self._params: list[int] = []
        self._output: int | None = None

    # -- bookkeeping --------------------------------------------------------

    def _new(self, value, parents=(), vjp=None, needs=False) -> Var:
        self._values.append(value)
        self._parents.append(tuple(parents))
        self._vjps.append(vjp)
        self._needs.append(needs)
        return Var(self, len(self._values) - 1)

    def _wrap(self, x) -> Var:
        if isinstance(x, Var):
            if x.tape is not self:
                raise ValueError("variable belongs to a different tape")
            return x
        if isinstance(x, Dual2Scalar):
            return self._new(x)
        return self._new(np.asarray(x, dtype=float))

    def _record(self, value, parents: Sequence[Var], vjp) -> Var:
        needs = any(self._needs[p.index] for p in parents)
        return self._new(value, [p.index for p in parents], vjp if needs else None, needs)

    def param(self, value) -> Var:
        """Register a differentiable parameter slot."""
        v = self._new(np.array(value, dtype=float), needs=True)
        self._params.append(v.index)
        return v

    def const(self, value) -> Var:
        return self._wrap(value)

    def requires_grad(self, v: Var) -> bool:
        return self._needs[v.index]

    @property
    def n_params(self) -> int:
        return sum(int(np.size(self._values[i])) for i in self._params)

    def set_output(self, v: Var) -> None:
        if np.size(v.value) != 1 or isinstance(v.value, Dual2Scalar):
            raise ValueError("tape output must be a real scalar")
        self._output = v.index

    # -- reverse sweep -------------------------------------------------------

    def gradient(self) -> np.ndarray:
        """d(output)/d(parameters) as one flat vector."""
        if self._output is None:
            raise StateError("tape has no recorded output")
        ct: list = [None] * len(self._values)
        ct[self._output] = np.ones_like(self._values[self._output])
        params = set(self._params)
        for i in range(self._output, -1, -1):
            g = ct[i]
            if g is None or self._vjps[i] is None:
                continue
            parents = self._parents[i]
            needs = [self._needs[p] for p in parents]
            pgs = self._vjps[i](g, needs)
            for p, need, pg in zip(parents, needs, pgs):
                if need and pg is not None:
                    ct[p] = _accumulate(ct[p], pg)
            if i not in params:
                ct[i] = None  # free intermediate cotangents as we go
        parts = []
        for i in self._params:
            g = ct[i]
            parts.append(np.zeros(np.size(self._values[i])) if g is None else np.ravel(g).astype(float))
        return np.concatenate(parts) if parts else np.zeros(0)

    # -- elementwise primitives on plain arrays -----------------------------

    def add(self, a, b) -> Var:
        a, b = self._wrap(a), self._wrap(b)
        sa, sb = a.shape, b.shape
        return self._record(
            a.value + b.value, (a, b),
            lambda g, n: (_unbroadcast(g, sa) if n[0] else None, _unbroadcast(g, sb) if n[1] else None),
        )

    def sub(self, a, b) -> Var:
        a, b = self._wrap(a), self._wrap(b)
        sa, sb = a.shape, b.shape
        return self._record(
            a.value - b.value, (a, b),
            lambda g, n: (_unbroadcast(g, sa) if n[0] else None, _unbroadcast(-g, sb) if n[1] else None),
        )

    def neg(self, a) -> Var:
        a = self._wrap(a)
        return self._record(-a.value, (a,), lambda g, n: (-g,))

    def mul(self, a, b) -> Var:
        a, b = self._wrap(a), self._wrap(b)
        av, bv = a.value, b.value
        return self._record(
            av * bv, (a, b),
            lambda g, n: (
                _unbroadcast(g * bv, _shape(av)) if n[0] else None,
                _unbroadcast(g * av, _shape(bv)) if n[1] else None,
            ),
        )

    def div(self, a, b) -> Var:
        a, b = self._wrap(a), self._wrap(b)
        av, bv = a.value, b.value
        out = av / bv
        return self._record(
            out, (a, b),
            lambda g, n: (
                _unbroadcast(g / bv, _shape(av)) if n[0] else None,
                _unbroadcast(-g * out / bv, _shape(bv)) if n[1] else None,
            ),
        )

    def square(self, a) -> Var:
        a = self._wrap(a)
        av = a.value
        return self._record(av * av, (a,), lambda g, n: (2.0 * g * av,))

    def tanh(self, a) -> Var:
        a = self._wrap(a)
        if isinstance(a.value, Dual2Scalar):
            return self.dual_activation(a, "tanh")
        t = np.tanh(a.value)
        return self._record(t, (a,), lambda g, n: (g * (1.0 - t * t),))

    def sin(self, a) -> Var:
        a = self._wrap(a)
        av = a.value
        return self._record(np.sin(av), (a,), lambda g, n: (g * np.cos(av),))

    def cos(self, a) -> Var:
        a = self._wrap(a)
        av = a.value
        return self._record(np.cos(av), (a,), lambda g, n: (-g * np.sin(av),))

    def exp(self, a) -> Var:
        a = self._wrap(a)
        e = np.exp(a.value)
        return self._record(e, (a,), lambda g, n: (g * e,))

    # -- reductions and structure --------------------------------------------

    def sum(self, a, axis=None) -> Var:
        a = self._wrap(a)
        shape = a.shape

        def vjp(g, n):
            g = np.asarray(g)
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return self._record(np.sum(a.value, axis=axis), (a,), vjp)

    def mean(self, a) -> Var:
        a = self._wrap(a)
        shape, size = a.shape, a.value.size
        return self._record(np.mean(a.value), (a,), lambda g, n: (np.full(shape, g / size),))

    def dot(self, a, w) -> Var:
        """Weighted sum ``np.dot(w, a)`` of a 1-D variable with constant weights."""
        a = self._wrap(a)
        w = np.asarray(w, dtype=float)
        if a.value.ndim != 1 or w.shape != a.value.shape:
            raise ValueError("dot expects matching 1-D operands")
        return self._record(np.dot(w, a.value), (a,), lambda g, n: (g * w,))

    def getitem(self, a, key) -> Var:
        a = self._wrap(a)
        shape = a.shape

        def vjp(g, n):
            out = np.zeros(shape)
            if _needs_add_at(key):
                np.add.at(out, key, g)
            else:
                out[key] = g
            return (out,)

        return self._record(a.value[key], (a,), vjp)

    def slice_reshape(self, a, start: int, stop: int, shape) -> Var:
        """View ``a[start:stop]`` of a flat parameter vector as ``shape``."""
        a = self._wrap(a)
        n = a.value.size

        def vjp(g, _):
            out = np.zeros(n)
            out[start:stop] = np.ravel(g)
            return (out,)

        return self._record(a.value[start:stop].reshape(shape), (a,), vjp)

    def concat(self, parts: Sequence, axis: int = -1) -> Var:
        vs = [self._wrap(p) for p in parts]
        sizes = [v.shape[axis] for v in vs]
        bounds = np.cumsum([0] + sizes)

        def vjp(g, n):
            idx = [slice(None)] * g.ndim
            out = []
            for k in range(len(vs)):
                idx[axis] = slice(bounds[k], bounds[k + 1])
                out.append(g[tuple(idx)] if n[k] else None)
            return tuple(out)

        return self._record(np.concatenate([v.value for v in vs], axis=axis), vs, vjp)

    # -- Dual2 payload primitives --------------------------------------------

    def lift(self, x: np.ndarray, coords: Sequence[int] = ()) -> Var:
        """Constant Dual2 input of shape (N, D) with the given coordinates seeded.

        The directions are stacked along the leading axis of d1/d2, one per
        entry of ``coords``; an empty ``coords`` gives a plain forward pass.
        """
        return self._new(seed_directions(np.asarray(x, dtype=float), coords))

    def as_dual(self, a) -> Var:
        """Plain array variable -> Dual2 variable with no seeded directions."""
        a = self._wrap(a)
        v = a.value
        empty = np.zeros((0,) + v.shape)
        return self._record(Dual2Scalar(v, empty, empty), (a,), lambda g, n: (g.val,))

    def part(self, a: Var, which: str) -> Var:
        """Extract ``val``, ``d1`` or ``d2`` from a Dual2 variable."""
        a = self._wrap(a)
        d = a.value
        if which == "val":
            def vjp(g, n):
                return (Dual2Scalar(g, np.zeros_like(d.d1), np.zeros_like(d.d2)),)
        elif which == "d1":
            def vjp(g, n):
                return (Dual2Scalar(np.zeros_like(d.val), g, np.zeros_like(d.d2)),)
        elif which == "d2":
            def vjp(g, n):
                return (Dual2Scalar(np.zeros_like(d.val), np.zeros_like(d.d1), g),)
        else:
            raise ValueError(f"unknown Dual2 component {which!r}")
        return self._record(getattr(d, which), (a,), vjp)

    def affine(self, x: Var, W: Var, b: Var) -> Var:
        """Dense layer ``x @ W + b`` on a Dual2 payload (bias touches val only)."""
        x, W, b = self._wrap(x), self._wrap(W), self._wrap(b)
        xv, Wv = x.value, W.value
        out = affine_forward(xv, Wv, b.value)

        def vjp(g: Dual2Scalar, n):
            gx = gW = gb = None
            if n[0]:
                WT = Wv.T
                gx = Dual2Scalar(g.val @ WT, g.d1 @ WT, g.d2 @ WT)
            if n[1]:
                a_in = xv.d1.shape[-1]
                gW = xv.val.T @ g.val
                if g.d1.size:
                    gW = gW + xv.d1.reshape(-1, a_in).T @ g.d1.reshape(-1, g.d1.shape[-1])
                    gW = gW + xv.d2.reshape(-1, a_in).T @ g.d2.reshape(-1, g.d2.shape[-1])
            if n[2]:
                gb = g.val.sum(axis=0)
            return gx, gW, gb

        return self._record(out, (x, W, b), vjp)

    def dual_activation(self, z: Var, kind: str) -> Var:
        """Elementwise tanh or sigmoid on a Dual2 payload."""
        z = self._wrap(z)
        zv = z.value
        f0, f1, f2 = _activation_derivs(zv.val, kind)
        z1, z2 = zv.d1, zv.d2
        out = Dual2Scalar(f0, f1 * z1, f1 * z2 + f2 * (z1 * z1))

        def vjp(g: Dual2Scalar, n):
            g1, g2 = g.d1, g.d2
            g2z1 = g2 * z1
            gz1 = f1 * g1 + 2.0 * f2 * g2z1
            gz2 = f1 * g2
            if g1.shape[0]:
                a = (g1 * z1 + g2 * z2).sum(axis=0)
                bb = (g2z1 * z1).sum(axis=0)
                gz = f1 * g.val + f2 * a + _third_deriv(f0, f1, kind) * bb
            else:
                gz = f1 * g.val
            return (Dual2Scalar(gz, gz1, gz2),)

        return self._record(out, (z,), vjp)

    def sigmoid(self, z: Var) -> Var:
        return self.dual_activation(z, "sigmoid")


def _needs_add_at(key) -> bool:
    # fancy (integer-array) indexing may repeat entries
    keys = key if isinstance(key, tuple) else (key,)
    return any(isinstance(k, (list, np.ndarray)) for k in keys)


def _activation_derivs(z, kind):
    if kind == "tanh":
        t = np.tanh(z)
        s = 1.0 - t * t
        return t, s, -2.0 * t * s
    if kind == "sigmoid":
        s = _sigmoid(z)
        p = s * (1.0 - s)
        return s, p, p * (1.0 - 2.0 * s)
    raise ValueError(f"unknown activation {kind!r}")


def _third_deriv(f0, f1, kind):
    # only the reverse sweep needs the third derivative; build it from f and f1 on demand
    if kind == "tanh":
        return -2.0 * f1 * (f1 - 2.0 * f0 * f0)
    return f1 * (1.0 - 6.0 * f0 + 6.0 * f0 * f0)


def seed_directions(x: np.ndarray, coords: Sequence[int]) -> Dual2Scalar:
    """Batch of points (N, D) lifted with one seeded direction per coordinate in ``coords``."""
    if x.ndim != 2:
        raise ValueError("expected points of shape (N, D)")
    n, dim = x.shape
    for j in coords:
        if not 0 <= j < dim:
            raise IndexError(f"seed coordinate {j} out of range for dimension {dim}")
    k = len(coords)
    d1 = np.zeros((k, n, dim))
    for a, j in enumerate(coords):
        d1[a, :, j] = 1.0
    return Dual2Scalar(x, d1, np.zeros((k, n, dim)))


def affine_forward(x: Dual2Scalar, W: np.ndarray, b: np.ndarray) -> Dual2Scalar:
    return Dual2Scalar(x.val @ W + b, x.d1 @ W, x.d2 @ W)


def activation_forward(z: Dual2Scalar, kind: str) -> Dual2Scalar:
    """Same arithmetic as :meth:`GradTape.dual_activation`, without recording."""
    f0, f1, f2 = _activation_derivs(z.val, kind)
    return Dual2Scalar(f0, f1 * z.d1, f1 * z.d2 + f2 * (z.d1 * z.d1))


def reverse_gradient(tape: GradTape) -> np.ndarray:
    return tape.gradient()


__all__ = [
    "Dual2Scalar", "GradTape", "Var", "StateError",
    "lift_seeded", "dual_tanh", "dual_sin", "dual_cos", "dual_exp", "dual_sigmoid", "dual_affine",
    "reverse_gradient", "seed_directions", "affine_forward", "activation_forward",
    "sin", "cos", "exp", "tanh", "sech",
]
