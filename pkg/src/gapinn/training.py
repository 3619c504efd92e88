"""Training loops: PINN, PINN+PW, GA-PINN, GA-PINN+PW and DGM.

An epoch of the full-batch modes is one Adam step on the physics loss. The
adversarial modes prepend a discriminator step and an adversarial generator
step, each with its own Adam state. DGM redraws its collocation batch every
epoch and runs to a fixed budget.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .autodiff import GradTape
from .checkpoint import load_checkpoint, save_checkpoint
from .losses import (TERMINATION_MODES, PhysicsEval, WeightedPointSet, boundary_errors, classify, combine,
                     interior_errors, labeled_loss, physics_objective, pw_update, uniform_weights)
from .metrics import nrmse
from .network import MlpSpec, Network, forward, tape_forward, xavier_init
from .optim import AdamState, NumericError, adam_step, minibatch_indices
from .problems import PdeProblem, get_problem
from .reference import TestSet, resolve_reference
from .sampling import (STREAM_DGM, analytic_test_set, draw_labeled, latin_hypercube, rng_for, sample_boundary,
                       sample_interior)

MODES = ("pinn", "pinn_pw", "gapinn", "gapinn_pw", "dgm")
GA_MODES = ("gapinn", "gapinn_pw")
PW_MODES = ("pinn_pw", "gapinn_pw")
REASONS = ("tc_reached", "pw_epsilon", "max_epochs", "numeric_error")

# seed offsets so generator and discriminator start from independent draws
_SEED_G = 11
_SEED_D = 12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PwParams:
    q: float
    e: float


@dataclass(frozen=True)
class TrainConfig:
    problem: str
    mode: str = "pinn"
    seed: int = 0
    generator: tuple[int, int] = (4, 100)  # hidden layers, nodes per layer
    discriminator: tuple[int, int] = (1, 100)
    n_interior: int = 5000  # N
    n_boundary: int = 100  # M, per boundary term
    n_labeled: int = 5  # J
    eta_G: float = 1e-3
    eta_P: float = 1e-3
    eta_D: float = 5e-3
    lambda1: float = 1.0
    lambda2: float = 1.0
    lam: float = 1.0
    pw_interior: PwParams | None = None
    pw_boundary: tuple[PwParams | None, ...] = ()  # one entry per boundary term, None = unweighted
    pw_epsilon: float = 0.0
    pw_termination: str = "hl_mass"
    tc: float = 1e-4
    max_epochs: int = 10000
    init: str = "glorot_uniform"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    dgm_batch: int = 256
    dgm_sampling: str = "fresh"  # "fresh" LHS draws or "subsample" of the fixed sets
    test_size: int = 10000
    nrmse_every: int = 0  # 0: final NRMSE only
    divergence_factor: float = 1e6  # abort once L_PINN exceeds this multiple of its first value; 0 disables
    problem_options: dict = field(default_factory=dict)
    data_root: str | None = None
    fallback_reference: bool = False
    reference_resolution: str = "standard"

    def __post_init__(self):
        object.__setattr__(self, "generator", tuple(int(v) for v in self.generator))
        object.__setattr__(self, "discriminator", tuple(int(v) for v in self.discriminator))
        object.__setattr__(self, "pw_interior", _as_pw(self.pw_interior))
        object.__setattr__(self, "pw_boundary", tuple(_as_pw(p) for p in self.pw_boundary))

    @property
    def is_ga(self) -> bool:
        return self.mode in GA_MODES

    @property
    def is_pw(self) -> bool:
        return self.mode in PW_MODES

    def validate(self, problem: PdeProblem | None = None) -> None:
        bad = []
        if self.mode not in MODES:
            bad.append(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("eta_G", "eta_P", "eta_D"):
            if not getattr(self, name) > 0:
                bad.append(f"{name} must be positive")
        if not self.tc > 0:
            bad.append("tc must be positive")
        if self.max_epochs < 1:
            bad.append("max_epochs must be at least 1")
        if self.n_interior < 1 or self.n_boundary < 1:
            bad.append("n_interior and n_boundary must be at least 1")
        if self.mode in GA_MODES and self.n_labeled < 1:
            bad.append("adversarial modes need n_labeled >= 1")
        for name in ("generator", "discriminator"):
            v = getattr(self, name)
            if len(v) != 2 or v[0] < 1 or v[1] < 1:
                bad.append(f"{name} must be (layers >= 1, nodes >= 1)")
        if self.pw_termination not in TERMINATION_MODES:
            bad.append(f"pw_termination must be one of {TERMINATION_MODES}")
        if self.pw_epsilon < 0:
            bad.append("pw_epsilon must be non-negative")
        for p in (self.pw_interior, *self.pw_boundary):
            if p is not None and (p.q < 0 or p.e < 0):
                bad.append("PW q and e must be non-negative")
        if self.dgm_sampling not in ("fresh", "subsample"):
            bad.append("dgm_sampling must be 'fresh' or 'subsample'")
        if self.dgm_batch < 1:
            bad.append("dgm_batch must be at least 1")
        if self.divergence_factor < 0:
            bad.append("divergence_factor must be non-negative")
        if self.test_size < 1 or self.nrmse_every < 0:
            bad.append("test_size must be >= 1 and nrmse_every >= 0")
        if self.reference_resolution not in ("standard", "coarse"):
            bad.append("reference_resolution must be 'standard' or 'coarse'")
        if problem is not None and len(self.pw_boundary) not in (0, len(problem.boundary_terms)):
            bad.append(f"pw_boundary needs {len(problem.boundary_terms)} entries for {problem.name}")
        if bad:
            raise ConfigError("; ".join(bad))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator"] = list(self.generator)
        d["discriminator"] = list(self.discriminator)
        d["pw_boundary"] = list(d["pw_boundary"])
        d["problem_options"] = dict(self.problem_options)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown training keys: {', '.join(unknown)}")
        if "problem" not in d:
            raise ConfigError("training config needs a problem")
        return cls(**d)


def _as_pw(p):
    if p is None or isinstance(p, PwParams):
        return p
    if isinstance(p, dict):
        return PwParams(float(p["q"]), float(p["e"]))
    q, e = p
    return PwParams(float(q), float(e))


# ---------------------------------------------------------------------------
# record
# ---------------------------------------------------------------------------


@dataclass
class TrainRecord:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    termination_epoch: int | None = None
    reason: str | None = None
    final_nrmse: float | None = None
    error: str | None = None

    def append(self, row: dict) -> None:
        epoch = row["epoch"]
        if self.rows and epoch != self.rows[-1][0] + 1:
            raise ValueError("epochs must be recorded consecutively")
        self.rows.append([float(row.get(c, np.nan)) for c in self.columns])

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def last(self, name: str) -> float:
        return self.rows[-1][self.columns.index(name)]

    @property
    def epochs(self) -> int:
        return len(self.rows)

    @property
    def completed(self) -> bool:
        return self.reason is not None and self.reason != "numeric_error"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow(_fmt_row(r))
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    def csv_line(self, i: int) -> str:
        return ",".join(_fmt_row(self.rows[i])) + "\n"

    @classmethod
    def read_csv(cls, path) -> "TrainRecord":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [[float(v) if v != "" else np.nan for v in r] for r in reader if r]
        return cls(columns, rows)

    def summary(self) -> dict:
        return {
            "termination_epoch": self.termination_epoch,
            "reason": self.reason,
            "final_nrmse": self.final_nrmse,
            "error": self.error,
            "epochs": self.epochs,
        }


def _fmt_row(r) -> list[str]:
    out = [str(int(r[0]))]
    for v in r[1:]:
        out.append("" if np.isnan(v) else repr(float(v)))
    return out


# ---------------------------------------------------------------------------
# adversarial losses
# ---------------------------------------------------------------------------


def _disc_input(x, u):
    return np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float).reshape(len(x), -1)], axis=1)


def d_loss(disc, labeled: TestSet, generator) -> float:
    """mean[(1 - D(x, u)) + D(x, G(x))] over the labeled points."""
    if len(labeled) == 0:
        raise ValueError("empty labeled set")
    real = np.asarray(disc(_disc_input(labeled.x, labeled.u))).reshape(-1)
    fake = np.asarray(disc(_disc_input(labeled.x, generator(labeled.x)))).reshape(-1)
    return float(np.dot(uniform_weights(len(labeled)), (1.0 - real) + fake))


def g_loss(disc, labeled: TestSet, generator) -> float:
    """L_T + mean(1 - D(x, G(x)))."""
    if len(labeled) == 0:
        raise ValueError("empty labeled set")
    fake = np.asarray(disc(_disc_input(labeled.x, generator(labeled.x)))).reshape(-1)
    return float(labeled_loss(generator, labeled) + np.dot(uniform_weights(len(labeled)), 1.0 - fake))


def lbar_pinn_loss(l_pinn: float, l_t: float, lambda2: float = 1.0) -> float:
    """Physics loss augmented with the labeled-sample loss."""
    return float(l_pinn + lambda2 * l_t)


def _d_objective(spec_d: MlpSpec, theta_d, labeled: TestSet, fake_u) -> tuple[float, np.ndarray]:
    tape = GradTape()
    th = tape.param(theta_d)
    w = uniform_weights(len(labeled))
    real = tape_forward(tape, spec_d, th, tape.lift(_disc_input(labeled.x, labeled.u)))
    fake = tape_forward(tape, spec_d, th, tape.lift(_disc_input(labeled.x, fake_u)))
    r = tape.getitem(tape.part(real, "val"), (slice(None), 0))
    f = tape.getitem(tape.part(fake, "val"), (slice(None), 0))
    loss = tape.dot((1.0 - r) + f, w)
    tape.set_output(loss)
    return float(loss.value), tape.gradient()


def _g_objective(spec_g: MlpSpec, theta_g, spec_d: MlpSpec, theta_d, labeled: TestSet):
    tape = GradTape()
    th = tape.param(theta_g)
    w = uniform_weights(len(labeled))
    u = tape.part(tape_forward(tape, spec_g, th, tape.lift(labeled.x)), "val")
    diff = u - labeled.u
    l_t = tape.dot(tape.sum(diff * diff, axis=1), w)
    pair = tape.as_dual(tape.concat([tape.const(labeled.x), u], axis=1))
    d = tape.getitem(tape.part(tape_forward(tape, spec_d, tape.const(theta_d), pair), "val"), (slice(None), 0))
    loss = l_t + tape.dot(1.0 - d, w)
    tape.set_output(loss)
    return float(loss.value), float(l_t.value), tape.gradient()


# ---------------------------------------------------------------------------
# trainer
# ---------------------------------------------------------------------------


Hook = Callable[[str, "Trainer"], None]


def _check_finite(name: str, value: float) -> None:
    if not np.isfinite(value):
        raise NumericError(f"{name} is not finite ({value})")


class Trainer:
    """Holds the state of one run and advances it epoch by epoch."""

    def __init__(self, config: TrainConfig, problem: PdeProblem | None = None,
                 initial_generator=None, test_set: TestSet | None = None, hooks: Sequence[Hook] = ()):
        """``initial_generator`` is a parameter vector, or a fixed model with a ``jet``
        method (e.g. an analytic stub) that is evaluated but cannot be trained."""
        problem = problem or get_problem(config.problem, **config.problem_options)
        config.validate(problem)
        self.config = config
        self.problem = problem
        self.hooks = list(hooks)
        cfg = config
        dim, out = problem.input_dim, problem.output_dim

        self.gen_spec = MlpSpec.from_layers(dim, cfg.generator[0], cfg.generator[1], out)
        self.stub = None
        if initial_generator is not None and hasattr(initial_generator, "jet"):
            if cfg.is_ga:
                raise ConfigError("a fixed stub generator cannot take part in adversarial training")
            self.stub = initial_generator
            initial_generator = None
        if initial_generator is not None:
            theta = np.array(initial_generator, dtype=float)
            if theta.shape != (self.gen_spec.n_params,):
                raise ConfigError(f"initial generator needs {self.gen_spec.n_params} parameters")
        else:
            theta = xavier_init(self.gen_spec, _seed(cfg.seed, _SEED_G), cfg.init)
        self.theta_g = theta

        self.reference = None
        if not problem.has_analytic:
            self.reference = resolve_reference(problem, cfg.data_root, cfg.fallback_reference,
                                               cfg.reference_resolution)
        if test_set is not None:
            self.test_set = test_set
        elif self.reference is not None:
            self.test_set = self.reference
        else:
            self.test_set = analytic_test_set(problem, cfg.test_size, cfg.seed)

        self.interior = sample_interior(problem, cfg.n_interior, cfg.seed).points
        self.boundary = [sample_boundary(problem, i, cfg.n_boundary, cfg.seed).points
                         for i in range(len(problem.boundary_terms))]

        # PW state: weights per set, uniform where PW is off
        self.pw_sets: dict[str, WeightedPointSet] = {}
        if cfg.is_pw:
            if cfg.pw_interior is not None:
                self.pw_sets["f"] = WeightedPointSet.uniform(self.interior, cfg.pw_interior.e, cfg.pw_interior.q,
                                                             cfg.pw_epsilon)
            for i, p in enumerate(cfg.pw_boundary):
                if p is not None:
                    self.pw_sets[f"b{i}"] = WeightedPointSet.uniform(self.boundary[i], p.e, p.q, cfg.pw_epsilon)
            if not self.pw_sets:
                raise ConfigError("PW mode selected but no point set has PW parameters")

        adam = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps)
        self.adam_p = AdamState.zeros(self.gen_spec.n_params, cfg.eta_P, **adam)
        self.labeled = None
        if cfg.is_ga:
            self.disc_spec = MlpSpec.from_layers(dim + out, cfg.discriminator[0], cfg.discriminator[1], 1, "sigmoid")
            self.theta_d = xavier_init(self.disc_spec, _seed(cfg.seed, _SEED_D), cfg.init)
            self.adam_d = AdamState.zeros(self.disc_spec.n_params, cfg.eta_D, **adam)
            self.adam_g = AdamState.zeros(self.gen_spec.n_params, cfg.eta_G, **adam)
            self.labeled = draw_labeled(problem, cfg.n_labeled, cfg.seed, self.reference)

        self.record = TrainRecord(self._columns())
        self.epoch = 0
        self.last_eval = None

    # -- layout ---------------------------------------------------------------

    def _columns(self) -> list[str]:
        nb = len(self.problem.boundary_terms)
        cols = ["epoch", "L_f", *[f"L_b{i}" for i in range(nb)], "L_b", "L_PINN"]
        if self.config.is_pw:
            cols.append("L_PW")
        if self.config.is_ga:
            cols += ["L_T", "L_D", "L_G"]
        if self.config.is_pw:
            cols += [f"rho_{k}" for k in self.pw_sets]
        if self.config.nrmse_every:
            cols.append("NRMSE")
        return cols

    @property
    def generator(self):
        return self.stub if self.stub is not None else Network(self.gen_spec, self.theta_g)

    @property
    def discriminator(self) -> Network:
        return Network(self.disc_spec, self.theta_d)

    @property
    def done(self) -> bool:
        return self.record.reason is not None

    def _emit(self, event: str) -> None:
        for h in self.hooks:
            h(event, self)

    # -- epoch ----------------------------------------------------------------

    def _weights(self):
        if not self.config.is_pw:
            return None, None
        wf = self.pw_sets["f"].weights if "f" in self.pw_sets else None
        wb = [self.pw_sets[f"b{i}"].weights if f"b{i}" in self.pw_sets else uniform_weights(len(b))
              for i, b in enumerate(self.boundary)]
        return wf, wb

    def physics_eval(self, interior=None, boundary=None):
        cfg = self.config
        wf, wb = self._weights()
        lam = cfg.lam if cfg.is_pw else cfg.lambda1
        interior = self.interior if interior is None else interior
        boundary = self.boundary if boundary is None else boundary
        if self.stub is not None:
            return _stub_eval(self.problem, self.stub, interior, boundary, wf, wb, lam, cfg.lambda1)
        return physics_objective(self.problem, self.gen_spec, self.theta_g, interior, boundary,
                                 wf, wb, lam=lam, lambda1=cfg.lambda1)

    def _adversarial_steps(self, row: dict) -> None:
        # (1) discriminator step on L_D
        fake = forward(self.gen_spec, self.theta_g, self.labeled.x)
        l_d, grad_d = _d_objective(self.disc_spec, self.theta_d, self.labeled, fake)
        _check_finite("L_D", l_d)
        self.adam_d, self.theta_d = adam_step(self.adam_d, self.theta_d, grad_d)
        self._emit("d_step")
        # (2) adversarial generator step on L_G
        l_g, l_t, grad_g = _g_objective(self.gen_spec, self.theta_g, self.disc_spec, self.theta_d, self.labeled)
        _check_finite("L_G", l_g)
        self.adam_g, self.theta_g = adam_step(self.adam_g, self.theta_g, grad_g)
        self._emit("g_step")
        row.update(L_D=l_d, L_G=l_g, L_T=l_t)

    def _dgm_batch(self, k: int):
        cfg, p = self.config, self.problem
        b = cfg.dgm_batch
        if cfg.dgm_sampling == "subsample":
            xi = self.interior[minibatch_indices(len(self.interior), b, cfg.seed, k)]
            xb = [pts[minibatch_indices(len(pts), b, cfg.seed * 1000 + i + 1, k)]
                  for i, pts in enumerate(self.boundary)]
            return xi, xb
        xi = latin_hypercube(b, p.box, rng_for(cfg.seed, STREAM_DGM, k))
        xb = [sample_boundary(p, i, b, cfg.seed, stream=(STREAM_DGM, k, i + 1)).points
              for i in range(len(p.boundary_terms))]
        return xi, xb

    def step(self) -> None:
        """Run one epoch; sets ``record.reason`` when the run terminates."""
        if self.done:
            raise RuntimeError("run already terminated")
        cfg = self.config
        k = self.epoch + 1
        row: dict = {"epoch": k}
        try:
            if cfg.is_ga:
                self._adversarial_steps(row)
            batch = self._dgm_batch(k) if cfg.mode == "dgm" else (None, None)
            ev = self.physics_eval(*batch)
            _check_finite("L_PINN", ev.l_pinn)
            _check_finite("objective", ev.objective)
            l0 = self.record.rows[0][self.record.columns.index("L_PINN")] if self.record.rows else ev.l_pinn
            if cfg.divergence_factor and ev.l_pinn > cfg.divergence_factor * l0:
                raise NumericError(f"L_PINN = {ev.l_pinn:.3e} exceeds {cfg.divergence_factor:g} x its first value")
            row.update(L_f=ev.l_f, L_b=sum_left(ev.l_b), L_PINN=ev.l_pinn)
            for i, v in enumerate(ev.l_b):
                row[f"L_b{i}"] = v
            new_sets, reports = {}, {}
            if cfg.is_pw:
                row["L_PW"] = ev.objective
                for key, wps in self.pw_sets.items():
                    errs = ev.interior_errors if key == "f" else ev.boundary_errors[int(key[1:])]
                    new_sets[key], reports[key] = pw_update(wps, classify(errs, wps.e), cfg.pw_termination)
                    row[f"rho_{key}"] = reports[key].rho
            self.last_eval = ev
            if cfg.mode != "dgm" and ev.l_pinn <= cfg.tc:
                self._finish(row, k, "tc_reached")
                return
            if self.stub is not None:
                raise ConfigError("the stub generator does not meet the termination condition and cannot be trained")
            self.adam_p, self.theta_g = adam_step(self.adam_p, self.theta_g, ev.grad)
            self._emit("p_step")
            self.pw_sets.update(new_sets)
        except NumericError as exc:
            self.record.reason = "numeric_error"
            self.record.error = f"epoch {k}: {exc}"
            self.record.termination_epoch = self.epoch
            return
        if cfg.is_pw and all(r.terminated for r in reports.values()):
            self._finish(row, k, "pw_epsilon")
        elif k >= cfg.max_epochs:
            self._finish(row, k, "max_epochs")
        else:
            self._commit(row, k)

    def _commit(self, row: dict, k: int) -> None:
        every = self.config.nrmse_every
        if every and k % every == 0:
            row["NRMSE"] = self.evaluate()
        self.record.append(row)
        self.epoch = k
        self._emit("epoch")

    def _finish(self, row: dict, k: int, reason: str) -> None:
        final = self.evaluate()
        if self.config.nrmse_every:
            row["NRMSE"] = final
        self.record.append(row)
        self.epoch = k
        self.record.termination_epoch = k
        self.record.reason = reason
        self.record.final_nrmse = final
        self._emit("epoch")

    def evaluate(self) -> float:
        return nrmse(self.generator, self.test_set)

    def run(self, on_epoch: Callable[["Trainer"], None] | None = None) -> TrainRecord:
        while not self.done:
            self.step()
            if on_epoch is not None:
                on_epoch(self)
        return self.record

    # -- checkpoints ----------------------------------------------------------

    def save(self, path) -> None:
        arrays = {"theta_g": self.theta_g, "rows": np.array(self.record.rows).reshape(-1, len(self.record.columns))}
        meta = {
            "config": self.config.to_dict(),
            "generator_spec": self.gen_spec.to_dict(),
            "epoch": self.epoch,
            "columns": self.record.columns,
            "record": self.record.summary(),
            "adam": {},
        }
        states = {"p": self.adam_p}
        if self.config.is_ga:
            arrays["theta_d"] = self.theta_d
            meta["discriminator_spec"] = self.disc_spec.to_dict()
            states.update(d=self.adam_d, g=self.adam_g)
        for name, st in states.items():
            arrays[f"adam_{name}_m"] = st.m
            arrays[f"adam_{name}_v"] = st.v
            meta["adam"][name] = st.t
        for key, wps in self.pw_sets.items():
            arrays[f"pw_{key}"] = wps.weights
        save_checkpoint(path, meta, arrays)

    @classmethod
    def resume(cls, path, config: TrainConfig | None = None, **kwargs) -> "Trainer":
        meta, arrays = load_checkpoint(path)
        if config is None:
            config = TrainConfig.from_dict(meta["config"])
        elif config.to_dict() != meta["config"]:
            raise ConfigError("checkpoint was written by a different configuration")
        t = cls(config, **kwargs)
        t.theta_g = arrays["theta_g"]
        states = {"p": "adam_p"}
        if config.is_ga:
            t.theta_d = arrays["theta_d"]
            states.update(d="adam_d", g="adam_g")
        for name, attr in states.items():
            st = getattr(t, attr)
            setattr(t, attr, replace(st, m=arrays[f"adam_{name}_m"], v=arrays[f"adam_{name}_v"],
                                     t=int(meta["adam"][name])))
        for key in list(t.pw_sets):
            t.pw_sets[key] = replace(t.pw_sets[key], weights=arrays[f"pw_{key}"])
        t.record.rows = [list(r) for r in arrays["rows"]]
        summ = meta["record"]
        t.record.termination_epoch = summ["termination_epoch"]
        t.record.reason = summ["reason"]
        t.record.final_nrmse = summ["final_nrmse"]
        t.record.error = summ["error"]
        t.epoch = int(meta["epoch"])
        return t


def _stub_eval(problem, model, interior, boundary, wf, wb, lam, lambda1) -> PhysicsEval:
    ef = interior_errors(problem, model, interior)
    ebs = [boundary_errors(problem, i, model, pts) for i, pts in enumerate(boundary)]
    l_f = float(np.dot(uniform_weights(len(ef)), ef))
    l_b = [float(np.dot(uniform_weights(len(e)), e)) for e in ebs]
    wf = uniform_weights(len(ef)) if wf is None else wf
    wb = [uniform_weights(len(e)) for e in ebs] if wb is None else wb
    objective = combine(float(np.dot(wf, ef)), [float(np.dot(w, e)) for w, e in zip(wb, ebs)], lam)
    return PhysicsEval(float(objective), None, ef, ebs, l_f, l_b, float(combine(l_f, l_b, lambda1)))


def sum_left(values: Sequence[float]) -> float:
    total = 0.0
    for v in values:
        total = total + v
    return total


def _seed(seed: int, offset: int) -> int:
    return int(seed) * 100 + offset


def train_epoch_gapinn(trainer: Trainer) -> Trainer:
    """One adversarial epoch: discriminator, adversarial generator, physics fine-tune."""
    if not trainer.config.is_ga:
        raise ConfigError("train_epoch_gapinn needs an adversarial mode")
    trainer.step()
    return trainer


def train(config: TrainConfig, **kwargs) -> TrainRecord:
    return Trainer(config, **kwargs).run()
