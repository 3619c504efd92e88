"""The six benchmark problems: residual operators, boundary terms, exact solutions.

Residual and boundary operators are written once and evaluated on either
plain numpy arrays or tape variables, so the same code produces loss values
and their parameter gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Dual2Scalar

REGION_TOL = 1e-12


class UnsupportedError(ValueError):
    """Operation not available for this problem (e.g. no closed form)."""


# ---------------------------------------------------------------------------
# derivative bundle
# ---------------------------------------------------------------------------


class DerivBundle:
    """u and its first/pure-second input derivatives at a batch of points.

    Storage is direction-major: ``u`` is (N, out) and ``d1``/``d2`` are
    (K, N, out) with one slice per seeded coordinate in ``coords``. The
    entries may be numpy arrays or tape variables.
    """

    def __init__(self, u, d1, d2, coords: Sequence[int]):
        self.u = u
        self.d1 = d1
        self.d2 = d2
        self.coords = tuple(coords)
        self._pos = {c: i for i, c in enumerate(self.coords)}

    @classmethod
    def from_jet(cls, jet: Dual2Scalar, coords: Sequence[int]) -> "DerivBundle":
        return cls(jet.val, jet.d1, jet.d2, coords)

    @classmethod
    def from_tape(cls, tape, out, coords: Sequence[int]) -> "DerivBundle":
        return cls(tape.part(out, "val"), tape.part(out, "d1"), tape.part(out, "d2"), coords)

    @property
    def n_points(self) -> int:
        return np.shape(self.u.value if isinstance(self.u, ad.Var) else self.u)[0]

    @property
    def output_dim(self) -> int:
        return np.shape(self.u.value if isinstance(self.u, ad.Var) else self.u)[1]

    def _slot(self, j: int) -> int:
        try:
            return self._pos[j]
        except KeyError:
            raise ValueError(f"coordinate {j} was not seeded for this bundle") from None

    def value(self, k: int = 0):
        return self.u[:, k]

    def d(self, j: int, k: int = 0):
        return self.d1[self._slot(j), :, k]

    def dd(self, j: int, k: int = 0):
        return self.d2[self._slot(j), :, k]

    def lap(self, k: int = 0, coords: Sequence[int] | None = None):
        coords = self.coords if coords is None else coords
        acc = self.dd(coords[0], k)
        for j in coords[1:]:
            acc = acc + self.dd(j, k)
        return acc

    @property
    def first(self) -> np.ndarray:
        """(N, out, K) matrix of first partials (array-backed bundles only)."""
        return np.moveaxis(np.asarray(self.d1), 0, -1)

    @property
    def pure_second(self) -> np.ndarray:
        return np.moveaxis(np.asarray(self.d2), 0, -1)


def lift_columns(x: np.ndarray, coords: Sequence[int]) -> list[Dual2Scalar]:
    """Coordinate columns of (N, D) points as Dual2 values, one direction per coord."""
    n, dim = x.shape
    cols = []
    for j in range(dim):
        d1 = np.zeros((len(coords), n))
        for a, c in enumerate(coords):
            if c == j:
                d1[a] = 1.0
        cols.append(Dual2Scalar(x[:, j], d1, np.zeros((len(coords), n))))
    return cols


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """Points with coordinate ``axis`` pinned to one of ``values``."""

    axis: int
    values: tuple[float, ...]

    def assign(self, free: np.ndarray) -> np.ndarray:
        """Pin the axis on LHS-drawn points: first ceil(m/2) to values[0], rest to values[1]."""
        pts = free.copy()
        m = len(pts)
        if len(self.values) == 1:
            pts[:, self.axis] = self.values[0]
        else:
            half = (m + 1) // 2
            pts[:half, self.axis] = self.values[0]
            pts[half:, self.axis] = self.values[1]
        return pts

    def expand(self, pts: np.ndarray) -> np.ndarray:
        return pts

    def on_region(self, pts: np.ndarray) -> np.ndarray:
        col = pts[:, self.axis]
        return np.min([np.abs(col - v) for v in self.values], axis=0) <= REGION_TOL


@dataclass(frozen=True)
class Periodic:
    """Pairs of points at ``axis = low`` and ``axis = high`` sharing other coordinates.

    Point sets store the ``low`` member of each pair; :meth:`expand` stacks
    both members, low block first.
    """

    axis: int
    low: float
    high: float

    def assign(self, free: np.ndarray) -> np.ndarray:
        pts = free.copy()
        pts[:, self.axis] = self.low
        return pts

    def expand(self, pts: np.ndarray) -> np.ndarray:
        hi = pts.copy()
        hi[:, self.axis] = self.high
        return np.concatenate([pts, hi], axis=0)

    def on_region(self, pts: np.ndarray) -> np.ndarray:
        # accepts expanded points: both halves must match and sit on their faces
        m = len(pts) // 2
        if len(pts) != 2 * m:
            return np.zeros(len(pts), dtype=bool)
        a, b = pts[:m], pts[m:]
        others = [j for j in range(pts.shape[1]) if j != self.axis]
        ok = (np.abs(a[:, self.axis] - self.low) <= REGION_TOL) & (np.abs(b[:, self.axis] - self.high) <= REGION_TOL)
        ok &= np.all(np.abs(a[:, others] - b[:, others]) <= REGION_TOL, axis=1)
        return np.concatenate([ok, ok])


@dataclass(frozen=True)
class BoundaryTerm:
    name: str
    region: Face | Periodic
    residual: Callable  # (bundle, x) -> tuple of components, one row per stored point
    order: int = 0  # highest input-derivative order the operator needs


@dataclass(frozen=True)
class ReferenceSpec:
    """Where a problem's gridded reference solution comes from."""

    filename: str
    columns: tuple[str, ...]
    fallback: str  # name of the in-repo oracle in :mod:`gapinn.reference`


@dataclass(frozen=True)
class PdeProblem:
    name: str
    coords: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    output_dim: int
    residual_fn: Callable = field(repr=False)
    boundary_terms: tuple[BoundaryTerm, ...] = field(repr=False)
    analytic: Callable | None = field(default=None, repr=False)
    reference: ReferenceSpec | None = None
    options: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return len(self.coords)

    @property
    def box(self) -> np.ndarray:
        return np.array([self.lower, self.upper], dtype=float)

    @property
    def has_analytic(self) -> bool:
        return self.analytic is not None


def residual(problem: PdeProblem, bundle: DerivBundle, x: np.ndarray) -> tuple:
    """Equation residual L[u] - F at the bundle's points, one entry per component."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != problem.input_dim or bundle.output_dim != problem.output_dim:
        raise ValueError(
            f"{problem.name}: expected {problem.input_dim}-D points and {problem.output_dim} outputs, "
            f"got points {x.shape} and {bundle.output_dim} outputs"
        )
    if bundle.n_points != len(x):
        raise ValueError("bundle and points disagree on the number of points")
    return problem.residual_fn(bundle, x)


def boundary_residual(problem: PdeProblem, i: int, bundle: DerivBundle, x: np.ndarray) -> tuple:
    """B_i[u] - g_i on the evaluation points of term ``i`` (periodic terms: stacked pairs)."""
    term = problem.boundary_terms[i]
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != problem.input_dim or bundle.output_dim != problem.output_dim:
        raise ValueError(f"{problem.name}: dimension mismatch in boundary term {i}")
    if bundle.n_points != len(x):
        raise ValueError("bundle and points disagree on the number of points")
    on = term.region.on_region(x)
    if not np.all(on):
        bad = int(np.flatnonzero(~on)[0])
        raise ValueError(f"{problem.name}: point {x[bad].tolist()} is not on boundary region {term.name!r}")
    return term.residual(bundle, x)


def analytic_solution(problem: PdeProblem, x) -> np.ndarray:
    if problem.analytic is None:
        raise UnsupportedError(f"{problem.name} has no closed-form solution; use its reference dataset")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    cols = [x2[:, j] for j in range(x2.shape[1])]
    out = np.stack([np.broadcast_to(c, (len(x2),)) for c in problem.analytic(cols)], axis=1).astype(float)
    return out[0] if single else out


class AnalyticModel:
    """Stand-in network that returns a problem's exact solution."""

    def __init__(self, problem: PdeProblem):
        if problem.analytic is None:
            raise UnsupportedError(f"{problem.name} has no closed-form solution")
        self.problem = problem

    def __call__(self, x) -> np.ndarray:
        return analytic_solution(self.problem, x)

    def jet(self, x, coords: Sequence[int]) -> Dual2Scalar:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, k = len(x), len(coords)
        outs = self.problem.analytic(lift_columns(x, coords))
        vals, d1s, d2s = [], [], []
        for o in outs:
            if not isinstance(o, Dual2Scalar):
                o = Dual2Scalar(o, np.zeros((k, n)), np.zeros((k, n)))
            vals.append(np.broadcast_to(o.val, (n,)))
            d1s.append(np.broadcast_to(o.d1, (k, n)))
            d2s.append(np.broadcast_to(o.d2, (k, n)))
        return Dual2Scalar(np.stack(vals, -1), np.stack(d1s, -1), np.stack(d2s, -1))


def model_bundle(model, x: np.ndarray, coords: Sequence[int]) -> DerivBundle:
    return DerivBundle.from_jet(model.jet(x, coords), coords)


# ---------------------------------------------------------------------------
# the benchmark set
# ---------------------------------------------------------------------------

PI = np.pi
BURGERS_NU = 0.01 / PI


def _burgers() -> PdeProblem:
    # coordinates (t, x)
    def res(b, x):
        u = b.value()
        return (b.d(0) + u * b.d(1) - BURGERS_NU * b.dd(1),)

    terms = (
        BoundaryTerm("initial", Face(0, (0.0,)), lambda b, x: (b.value() + np.sin(PI * x[:, 1]),)),
        BoundaryTerm("walls", Face(1, (-1.0, 1.0)), lambda b, x: (b.value(),)),
    )
    return PdeProblem(
        "burgers", ("t", "x"), (0.0, -1.0), (1.0, 1.0), 1, res, terms,
        reference=ReferenceSpec("burgers.txt", ("t", "x", "u"), "burgers_cole_hopf"),
    )


def _poisson() -> PdeProblem:
    def res(b, x):
        return (b.lap() + np.sin(PI * x[:, 0]) * np.sin(PI * x[:, 1]),)

    def exact(c):
        return (ad.sin(PI * c[0]) * ad.sin(PI * c[1]) * (1.0 / (2.0 * PI ** 2)),)

    terms = (
        BoundaryTerm("y_faces", Face(1, (0.0, 1.0)), lambda b, x: (b.value(),)),
        BoundaryTerm("x_faces", Face(0, (0.0, 1.0)), lambda b, x: (b.value(),)),
    )
    return PdeProblem("poisson", ("x", "y"), (0.0, 0.0), (1.0, 1.0), 1, res, terms, analytic=exact)


def _helmholtz(k: float = 1.0) -> PdeProblem:
    k = float(k)

    def res(b, x):
        return (b.lap() + (k * k) * b.value(),)

    def exact(c):
        return (ad.sin(k * c[0]),)

    def bc(b, x):
        return (b.value() - np.sin(k * x[:, 0]),)

    terms = (
        BoundaryTerm("y_faces", Face(1, (0.0, 1.0)), bc),
        BoundaryTerm("x_faces", Face(0, (0.0, 1.0)), bc),
    )
    return PdeProblem("helmholtz", ("x", "y"), (0.0, 0.0), (1.0, 1.0), 1, res, terms,
                      analytic=exact, options={"k": k})


def _schrodinger() -> PdeProblem:
    # coordinates (t, x); outputs (u, v) = (Re h, Im h)
    def res(b, x):
        u, v = b.value(0), b.value(1)
        mod2 = u * u + v * v
        real = -b.d(0, 1) + 0.5 * b.dd(1, 0) + mod2 * u
        imag = b.d(0, 0) + 0.5 * b.dd(1, 1) + mod2 * v
        return (real, imag)

    def initial(b, x):
        return (b.value(0) - 2.0 / np.cosh(x[:, 1]), b.value(1))

    def periodic_value(b, x):
        m = len(x) // 2
        u, v = b.value(0), b.value(1)
        return (u[:m] - u[m:], v[:m] - v[m:])

    def periodic_slope(b, x):
        m = len(x) // 2
        ux, vx = b.d(1, 0), b.d(1, 1)
        return (ux[:m] - ux[m:], vx[:m] - vx[m:])

    terms = (
        BoundaryTerm("initial", Face(0, (0.0,)), initial),
        BoundaryTerm("periodic_value", Periodic(1, -5.0, 5.0), periodic_value),
        BoundaryTerm("periodic_slope", Periodic(1, -5.0, 5.0), periodic_slope, order=1),
    )
    return PdeProblem(
        "schrodinger", ("t", "x"), (0.0, -5.0), (PI / 2, 5.0), 2, res, terms,
        reference=ReferenceSpec("schrodinger.txt", ("t", "x", "u", "v"), "schrodinger_split_step"),
    )


def hd_poisson_solution(c):
    return (c[0] * c[0] - c[1] * c[1] + c[2] * c[2] - c[3] * c[3] + c[4] * c[5] + c[6] * c[7] * c[8] * c[9],)


def _hd_poisson() -> PdeProblem:
    dim = 10

    def res(b, x):
        return (-b.lap(),)

    def bc(b, x):
        return (b.value() - hd_poisson_solution([x[:, j] for j in range(dim)])[0],)

    terms = tuple(BoundaryTerm(f"face_{i}", Face(i, (0.0, 1.0)), bc) for i in range(dim))
    return PdeProblem(
        "hd_poisson", tuple(f"x{i + 1}" for i in range(dim)), (0.0,) * dim, (1.0,) * dim, 1,
        res, terms, analytic=hd_poisson_solution,
    )


def _heat() -> PdeProblem:
    # coordinates (x, y, t); the unbounded plane is truncated to [-1, 1]^2
    def res(b, x):
        return (b.d(2) - (b.dd(0) + b.dd(1)),)

    def exact(c):
        return (c[0] - c[1],)

    terms = (BoundaryTerm("initial", Face(2, (0.0,)), lambda b, x: (b.value() - (x[:, 0] - x[:, 1]),)),)
    return PdeProblem("heat", ("x", "y", "t"), (-1.0, -1.0, 0.0), (1.0, 1.0, 1.0), 1, res, terms, analytic=exact)


_FACTORIES = {
    "burgers": _burgers,
    "poisson": _poisson,
    "helmholtz": _helmholtz,
    "schrodinger": _schrodinger,
    "hd_poisson": _hd_poisson,
    "heat": _heat,
}

PROBLEM_NAMES = tuple(_FACTORIES)


def get_problem(name: str, **options) -> PdeProblem:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}") from None
    return factory(**options)
