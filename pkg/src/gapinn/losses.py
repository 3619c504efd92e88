"""Physics-informed losses and the point-weighting (PW) update.

Every mean is computed as ``np.dot(w, e)`` with uniform weights ``w = 1/N``,
which makes the unweighted losses and the PW losses at uniform weights the
same floating-point computation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .autodiff import GradTape, StateError
from .network import MlpSpec, tape_forward
from .problems import DerivBundle, PdeProblem, boundary_residual, model_bundle, residual
from .reference import TestSet

RHO_CLAMP = 1e-8
TERMINATION_MODES = ("hl_mass", "literal")


def uniform_weights(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("empty point set")
    return np.full(n, 1.0 / n)


def sqnorm(components: Sequence):
    """Per-point squared norm of a residual given as a tuple of components."""
    acc = components[0] * components[0]
    for c in components[1:]:
        acc = acc + c * c
    return acc


def _seeds(problem: PdeProblem, order: int) -> tuple[int, ...]:
    return tuple(range(problem.input_dim)) if order > 0 else ()


# ---------------------------------------------------------------------------
# per-point errors for a callable model (network or analytic stub)
# ---------------------------------------------------------------------------


def interior_errors(problem: PdeProblem, model, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("empty interior point set")
    bundle = model_bundle(model, x, _seeds(problem, 2))
    return np.asarray(sqnorm(residual(problem, bundle, x)))


def boundary_errors(problem: PdeProblem, i: int, model, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 0:
        raise ValueError("empty boundary point set")
    term = problem.boundary_terms[i]
    xe = term.region.expand(pts)
    bundle = model_bundle(model, xe, _seeds(problem, term.order))
    return np.asarray(sqnorm(boundary_residual(problem, i, bundle, xe)))


def equation_loss(problem: PdeProblem, model, interior) -> float:
    x = getattr(interior, "points", interior)
    e = interior_errors(problem, model, x)
    return float(np.dot(uniform_weights(len(e)), e))


def boundary_loss(problem: PdeProblem, model, i: int, pts) -> float:
    pts = getattr(pts, "points", pts)
    e = boundary_errors(problem, i, model, pts)
    return float(np.dot(uniform_weights(len(e)), e))


def combine(l_f: float, l_b: Sequence[float], lam: float) -> float:
    """l_f + lam * sum(l_b), summed left to right."""
    if not len(l_b):
        return l_f
    total_b = l_b[0]
    for v in l_b[1:]:
        total_b = total_b + v
    return l_f + lam * total_b


def pinn_loss(problem: PdeProblem, model, interior, boundary_sets: Sequence, lambda1: float = 1.0) -> float:
    l_f = equation_loss(problem, model, interior)
    l_b = [boundary_loss(problem, model, i, s) for i, s in enumerate(boundary_sets)]
    return float(combine(l_f, l_b, lambda1))


def labeled_loss(model, labeled: TestSet) -> float:
    if len(labeled) == 0:
        raise ValueError("empty labeled set")
    pred = np.asarray(model(labeled.x)).reshape(labeled.u.shape)
    diff = pred - labeled.u
    return float(np.dot(uniform_weights(len(labeled)), np.sum(diff * diff, axis=1)))


# ---------------------------------------------------------------------------
# point weighting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedPointSet:
    points: np.ndarray
    weights: np.ndarray
    e: float  # squared-error level separating easy (<= e) from hard points
    q: float  # update magnitude
    eps: float = 0.0  # terminal tolerance

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights differ in length")
        if self.e < 0 or self.q < 0:
            raise ValueError("e and q must be non-negative")

    @classmethod
    def uniform(cls, points, e: float, q: float, eps: float = 0.0) -> "WeightedPointSet":
        points = getattr(points, "points", points)
        return cls(np.asarray(points, dtype=float), uniform_weights(len(points)), e, q, eps)


@dataclass(frozen=True)
class PwStepReport:
    rho: float  # weight mass on hard points before the update
    alpha: float
    terminated: bool


def classify(errors, e: float) -> np.ndarray:
    """+1 for easy points (squared error <= e), -1 for hard ones."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors < 0):
        raise ValueError("squared errors must be non-negative")
    return np.where(errors <= e, 1.0, -1.0)


def pw_update(wps: WeightedPointSet, beta, termination: str = "hl_mass") -> tuple[WeightedPointSet, PwStepReport]:
    """Shift weight toward easy points while rho > 0.5 and toward hard points after."""
    if termination not in TERMINATION_MODES:
        raise ValueError(f"termination must be one of {TERMINATION_MODES}")
    w = wps.weights
    beta = np.asarray(beta, dtype=float)
    if beta.shape != w.shape:
        raise ValueError("one classification per point is required")
    if abs(w.sum() - 1.0) > 1e-9:
        raise StateError(f"point weights sum to {w.sum()!r}, not 1")
    rho = min(max(float(w[beta < 0].sum()), 0.0), 1.0)  # summation can overshoot by an ulp
    rc = min(max(rho, RHO_CLAMP), 1.0 - RHO_CLAMP)
    alpha = wps.q * np.log((1.0 - rc) / rc)
    if alpha == 0.0 or np.all(beta == beta[0]):
        new_w = w  # common factor cancels exactly
    else:
        # exp(-alpha*beta) up to the common factor exp(alpha): hard points gain ratio**(2q)
        # relative to easy ones. Powers of the exact ratio round better than exp(log(.)).
        ratio = (1.0 - rc) / rc
        hard = beta < 0
        g = ratio ** (2.0 * wps.q)
        scaled = w.copy()
        if np.isfinite(g):
            scaled[hard] *= g
        else:
            scaled[~hard] *= ratio ** (-2.0 * wps.q)
        new_w = scaled / scaled.sum()
    done = rho <= wps.eps if termination == "hl_mass" else (1.0 - rho) <= wps.eps
    return replace(wps, weights=new_w), PwStepReport(rho, float(alpha), bool(done))


def weighted_pinn_loss(problem: PdeProblem, model, interior: WeightedPointSet,
                       boundary: Sequence[WeightedPointSet], lam: float = 1.0) -> float:
    l_f = float(np.dot(interior.weights, interior_errors(problem, model, interior.points)))
    l_b = [float(np.dot(s.weights, boundary_errors(problem, i, model, s.points))) for i, s in enumerate(boundary)]
    return float(combine(l_f, l_b, lam))


# ---------------------------------------------------------------------------
# tape-backed objective used for training
# ---------------------------------------------------------------------------


@dataclass
class PhysicsEval:
    objective: float  # the minimized (possibly weighted) loss
    grad: np.ndarray
    interior_errors: np.ndarray
    boundary_errors: list[np.ndarray]
    l_f: float  # unweighted
    l_b: list[float]
    l_pinn: float


def physics_objective(problem: PdeProblem, spec: MlpSpec, theta: np.ndarray, interior_x: np.ndarray,
                      boundary_x: Sequence[np.ndarray], interior_w: np.ndarray | None = None,
                      boundary_w: Sequence[np.ndarray] | None = None, lam: float = 1.0,
                      lambda1: float = 1.0) -> PhysicsEval:
    """Weighted PI loss and its parameter gradient in one reverse sweep.

    With ``interior_w``/``boundary_w`` left as None the weights are uniform
    and the objective is the plain PI loss. The unweighted terms are always
    reported as well.
    """
    tape = GradTape()
    th = tape.param(theta)
    dim = problem.input_dim

    coords = tuple(range(dim))
    out = tape_forward(tape, spec, th, tape.lift(interior_x, coords))
    e_f = sqnorm(residual(problem, DerivBundle.from_tape(tape, out, coords), interior_x))
    w_f = uniform_weights(len(interior_x)) if interior_w is None else interior_w
    loss_f = tape.dot(e_f, w_f)

    e_b, loss_b = [], []
    for i, pts in enumerate(boundary_x):
        term = problem.boundary_terms[i]
        xe = term.region.expand(pts)
        seeds = _seeds(problem, term.order)
        out_b = tape_forward(tape, spec, th, tape.lift(xe, seeds))
        e = sqnorm(boundary_residual(problem, i, DerivBundle.from_tape(tape, out_b, seeds), xe))
        w = uniform_weights(len(pts)) if boundary_w is None else boundary_w[i]
        e_b.append(e)
        loss_b.append(tape.dot(e, w))

    total = loss_f
    if loss_b:
        total_b = loss_b[0]
        for v in loss_b[1:]:
            total_b = total_b + v
        total = loss_f + lam * total_b
    tape.set_output(total)
    grad = tape.gradient()

    ef = np.asarray(e_f.value)
    ebs = [np.asarray(e.value) for e in e_b]
    l_f = float(np.dot(uniform_weights(len(ef)), ef))
    l_b = [float(np.dot(uniform_weights(len(e)), e)) for e in ebs]
    return PhysicsEval(float(total.value), grad, ef, ebs, l_f, l_b, float(combine(l_f, l_b, lambda1)))
