"""Seeded point generation: interior, boundary, labeled and test sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .problems import PdeProblem, analytic_solution
from .reference import TestSet

# stream tags keep the draws for different purposes independent under one seed
STREAM_INTERIOR = 1
STREAM_BOUNDARY = 100
STREAM_LABELED = 200
STREAM_TEST = 300
STREAM_DGM = 400


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    region: str  # "interior", "boundary-<i>", "labeled", "test"

    def __len__(self) -> int:
        return len(self.points)


def latin_hypercube(n: int, box, seed) -> np.ndarray:
    """n stratified points in an axis-aligned box given as (lower, upper) rows.

    ``seed`` is an int or a numpy Generator.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    box = np.asarray(box, dtype=float)
    lo, hi = box[0], box[1]
    unit = qmc.LatinHypercube(d=len(lo), seed=seed).random(n)
    return lo + unit * (hi - lo)


def sample_interior(problem: PdeProblem, n: int, seed: int, stream=(STREAM_INTERIOR,)) -> PointSet:
    return PointSet(latin_hypercube(n, problem.box, rng_for(seed, *stream)), "interior")


def sample_boundary(problem: PdeProblem, i: int, m: int, seed: int, stream=None) -> PointSet:
    """m points on boundary region i (periodic terms: the low member of each pair)."""
    if m < 1:
        raise ValueError("need at least one boundary sample")
    term = problem.boundary_terms[i]
    axis = term.region.axis
    free_axes = [j for j in range(problem.input_dim) if j != axis]
    rng = rng_for(seed, *(stream if stream is not None else (STREAM_BOUNDARY + i,)))
    pts = np.zeros((m, problem.input_dim))
    if free_axes:
        pts[:, free_axes] = latin_hypercube(m, problem.box[:, free_axes], rng)
    return PointSet(term.region.assign(pts), f"boundary-{i}")


def draw_labeled(problem: PdeProblem, J: int, seed: int, reference: TestSet | None = None) -> TestSet:
    """J labeled interior points: fresh LHS points with exact values, or rows of the reference set."""
    if J < 1:
        raise ValueError("J must be at least 1")
    rng = rng_for(seed, STREAM_LABELED)
    if problem.has_analytic:
        x = latin_hypercube(J, problem.box, rng)
        return TestSet(x, analytic_solution(problem, x), source="labeled:analytic")
    if reference is None:
        raise ValueError(f"{problem.name} needs a reference dataset to draw labeled samples")
    if J > len(reference):
        raise ValueError(f"cannot draw {J} labeled samples from a reference set of {len(reference)} rows")
    idx = np.sort(rng.choice(len(reference), size=J, replace=False))
    return TestSet(reference.x[idx], reference.u[idx], source="labeled:" + reference.source)


def analytic_test_set(problem: PdeProblem, size: int, seed: int) -> TestSet:
    x = latin_hypercube(size, problem.box, rng_for(seed, STREAM_TEST))
    return TestSet(x, analytic_solution(problem, x), source="analytic+lhs")
