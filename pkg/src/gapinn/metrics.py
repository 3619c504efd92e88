"""Test-set error, discrepancy grids and training-curve extraction."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .problems import PdeProblem, analytic_solution
from .reference import TestSet


class UndefinedMetricError(ValueError):
    pass


def nrmse(model, test: TestSet, batch: int = 20000) -> float:
    """sqrt(sum ||u_hat - u||^2 / sum ||u||^2) over the test points."""
    if len(test) == 0:
        raise UndefinedMetricError("empty test set")
    denom = float(np.sum(test.u * test.u))
    if denom == 0.0:
        raise UndefinedMetricError("exact solution is identically zero on the test set")
    num = 0.0
    for s in range(0, len(test), batch):
        pred = np.asarray(model(test.x[s:s + batch])).reshape(test.u[s:s + batch].shape)
        d = pred - test.u[s:s + batch]
        num += float(np.sum(d * d))
    return float(np.sqrt(num / denom))


@dataclass
class ErrorGrid:
    axes: tuple[int, int]  # indices of the two free coordinates
    axis_names: tuple[str, str]
    first: np.ndarray  # coordinates along axes[0] (rows)
    second: np.ndarray  # coordinates along axes[1] (columns)
    fixed: dict  # coordinate name -> value for sliced-out coordinates
    error: np.ndarray  # (len(first), len(second)) absolute discrepancy

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# rows: {self.axis_names[0]}; columns: {self.axis_names[1]}\n")
            for name, v in self.fixed.items():
                fh.write(f"# slice {name} = {v!r}\n")
            w = csv.writer(fh)
            w.writerow([f"{self.axis_names[0]}\\{self.axis_names[1]}", *[repr(float(c)) for c in self.second]])
            for r, row in zip(self.first, self.error):
                w.writerow([repr(float(r)), *[repr(float(v)) for v in row]])


def default_slice(problem: PdeProblem) -> dict[int, float]:
    """Free the first two coordinates; pin the rest at the box midpoint."""
    mid = problem.box.mean(axis=0)
    return {j: float(mid[j]) for j in range(2, problem.input_dim)}


def error_grid(model, problem: PdeProblem, resolution: int, slice_spec: dict[int, float] | None = None,
               exact=None) -> ErrorGrid:
    """|u_hat - u| on a resolution x resolution grid over two free coordinates.

    ``exact`` maps (n, D) points to (n, out) values; defaults to the analytic
    solution. Multi-component outputs use the Euclidean norm of the difference.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    dim = problem.input_dim
    slice_spec = default_slice(problem) if slice_spec is None else dict(slice_spec)
    lo, hi = problem.box
    for j, v in slice_spec.items():
        if not 0 <= j < dim:
            raise ValueError(f"slice coordinate {j} out of range")
        if not lo[j] - 1e-12 <= v <= hi[j] + 1e-12:
            raise ValueError(f"slice {problem.coords[j]} = {v} lies outside [{lo[j]}, {hi[j]}]")
    free = [j for j in range(dim) if j not in slice_spec]
    if len(free) != 2:
        raise ValueError(f"slice must leave exactly two free coordinates, got {len(free)}")
    a, b = free
    ga = np.linspace(lo[a], hi[a], resolution)
    gb = np.linspace(lo[b], hi[b], resolution)
    A, B = np.meshgrid(ga, gb, indexing="ij")
    pts = np.empty((resolution * resolution, dim))
    pts[:, a] = A.ravel()
    pts[:, b] = B.ravel()
    for j, v in slice_spec.items():
        pts[:, j] = v
    if exact is None:
        exact = lambda x: analytic_solution(problem, x)  # noqa: E731
    diff = np.asarray(model(pts)).reshape(len(pts), -1) - np.asarray(exact(pts)).reshape(len(pts), -1)
    err = np.sqrt(np.sum(diff * diff, axis=1)).reshape(resolution, resolution)
    return ErrorGrid((a, b), (problem.coords[a], problem.coords[b]), ga, gb,
                     {problem.coords[j]: v for j, v in slice_spec.items()}, err)


def reference_error_grid(model, problem: PdeProblem, reference: TestSet) -> ErrorGrid:
    """Discrepancy on the native grid of a 2-D reference set (no interpolation)."""
    if problem.input_dim != 2:
        raise ValueError("reference grids are only supported for two-coordinate problems")
    first = np.unique(reference.x[:, 0])
    second = np.unique(reference.x[:, 1])
    if len(first) * len(second) != len(reference):
        raise ValueError("reference points do not form a tensor grid")
    order = np.lexsort((reference.x[:, 1], reference.x[:, 0]))
    x, u = reference.x[order], reference.u[order]
    diff = np.asarray(model(x)).reshape(len(x), -1) - u
    err = np.sqrt(np.sum(diff * diff, axis=1)).reshape(len(first), len(second))
    return ErrorGrid((0, 1), (problem.coords[0], problem.coords[1]), first, second, {}, err)


def curves(record, which: Sequence[str]) -> dict[str, np.ndarray]:
    """Epoch-indexed columns of a training record."""
    if not record.rows:
        raise ValueError("record has no completed epochs")
    out = {"epoch": record.column("epoch")}
    for name in which:
        if name not in record.columns:
            raise ValueError(f"record has no quantity {name!r}; available: {', '.join(record.columns[1:])}")
        out[name] = record.column(name)
    return out


def write_curves(path, series: dict[str, np.ndarray]) -> None:
    names = list(series)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*(series[n] for n in names)):
            w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    v = float(v)
    if np.isnan(v):
        return ""
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)
