"""Experiment configs: built-in hyperparameter presets and the YAML file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .problems import PROBLEM_NAMES, get_problem
from .training import MODES, ConfigError, PwParams, TrainConfig

SCHEMA_VERSION = 1

# per-problem hyperparameters: (q1, e1), (q2, e2), TC, N, M, J, eta_G, eta_P, eta_D, HL_G, HL_D
PRESETS = {
    "burgers": dict(pw1=(1e-4, 0.02), pw2=(1e-4, 5e-4), tc=1e-4, n_interior=10000, n_boundary=100, n_labeled=10,
                    eta_G=1e-3, eta_P=1e-3, eta_D=5e-3, generator=(7, 20), discriminator=(8, 20)),
    "schrodinger": dict(pw1=(5e-3, 5e-4), pw2=(5e-3, 1e-4), tc=1e-3, n_interior=20000, n_boundary=100,
                        n_labeled=10, eta_G=1e-3, eta_P=1e-3, eta_D=5e-3, generator=(4, 100),
                        discriminator=(3, 100)),
    "helmholtz": dict(pw1=(6e-5, 5e-4), pw2=(6e-5, 5e-4), tc=1e-2, n_interior=20000, n_boundary=200, n_labeled=3,
                      eta_G=1e-3, eta_P=1e-5, eta_D=5e-5, generator=(4, 100), discriminator=(1, 100)),
    "poisson": dict(pw1=(5e-5, 5e-6), pw2=(5e-5, 5e-6), pw_f=(5e-5, 1e-3), tc=5e-5, n_interior=5000,
                    n_boundary=100, n_labeled=5, eta_G=1e-3, eta_P=1e-6, eta_D=5e-6, generator=(4, 100),
                    discriminator=(1, 100)),
    "hd_poisson": dict(pw1=(1e-3, 0.05), pw2=(1e-3, 0.05), tc=2e-3, n_interior=10000, n_boundary=500,
                       n_labeled=100, eta_G=1e-3, eta_P=1e-3, eta_D=5e-3, generator=(4, 100),
                       discriminator=(1, 100)),
    "heat": dict(pw1=(5e-5, 5e-6), pw2=(5e-5, 5e-6), tc=5e-6, n_interior=5000, n_boundary=100, n_labeled=10,
                 eta_G=1e-3, eta_P=1e-3, eta_D=5e-3, generator=(4, 100), discriminator=(1, 100)),
}

# fixed budgets of the mini-batch baseline
DGM_EPOCHS = {"burgers": 50000, "schrodinger": 20000, "helmholtz": 8000, "poisson": 6000, "hd_poisson": 6000,
              "heat": 6000}
DEFAULT_MAX_EPOCHS = 30000


def _pw_boundary(problem_name: str, p: dict) -> tuple:
    """Map the (q1, e1), (q2, e2) pair onto the problem's boundary terms."""
    terms = get_problem(problem_name).boundary_terms
    if problem_name == "hd_poisson":
        return tuple(PwParams(*p["pw1"]) for _ in terms)
    if problem_name == "schrodinger":
        # initial condition, then the two periodic terms
        return (PwParams(*p["pw1"]), PwParams(*p["pw2"]), PwParams(*p["pw2"]))
    pairs = [p["pw1"], p["pw2"]]
    return tuple(PwParams(*pairs[i]) for i in range(len(terms)))


def preset_config(problem: str, mode: str, seed: int = 0, **overrides) -> TrainConfig:
    if problem not in PRESETS:
        raise ConfigError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEM_NAMES)}")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    p = PRESETS[problem]
    kw = {k: v for k, v in p.items() if not k.startswith("pw")}
    kw["pw_boundary"] = _pw_boundary(problem, p)
    kw["pw_interior"] = PwParams(*p["pw_f"]) if "pw_f" in p else None
    kw["max_epochs"] = DGM_EPOCHS[problem] if mode == "dgm" else DEFAULT_MAX_EPOCHS
    kw.update(overrides)
    return TrainConfig(problem=problem, mode=mode, seed=seed, **kw)


@dataclass
class ExperimentConfig:
    runs: list[TrainConfig]
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "results"
    data_root: str | None = None
    fallback_reference: bool = False
    checkpoint_every: int = 500
    name: str = "experiment"

    def validate(self) -> None:
        if not self.runs:
            raise ConfigError("experiment has no runs")
        if not self.seeds:
            raise ConfigError("experiment has no seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be at least 1")
        labels = [run_label(r) for r in self.runs]
        if len(set(labels)) != len(labels):
            raise ConfigError("two runs share the same (problem, mode)")
        for r in self.runs:
            if r.problem not in PROBLEM_NAMES:
                raise ConfigError(f"unknown problem {r.problem!r}; choose from {', '.join(PROBLEM_NAMES)}")
            r.validate(get_problem(r.problem, **r.problem_options))

    def expand(self):
        """(label, seed, TrainConfig) for every run and seed."""
        for r in self.runs:
            for s in self.seeds:
                cfg = _with(r, seed=s, data_root=self.data_root or r.data_root,
                            fallback_reference=self.fallback_reference or r.fallback_reference)
                yield run_label(r), s, cfg

    def to_dict(self) -> dict:
        runs = []
        for r in self.runs:
            d = r.to_dict()
            d.pop("seed")
            d.pop("data_root")
            d.pop("fallback_reference")
            runs.append(d)
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "output_dir": self.output_dir,
            "seeds": list(self.seeds),
            "data_root": self.data_root,
            "fallback_reference": self.fallback_reference,
            "checkpoint_every": self.checkpoint_every,
            "runs": runs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        allowed = {"schema_version", "name", "output_dir", "seeds", "data_root", "fallback_reference",
                   "checkpoint_every", "runs"}
        unknown = sorted(set(d) - allowed)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(unknown)}")
        runs_raw = d.get("runs")
        if not isinstance(runs_raw, list):
            raise ConfigError("'runs' must be a list")
        runs = []
        for i, r in enumerate(runs_raw):
            if not isinstance(r, dict):
                raise ConfigError(f"runs[{i}] must be a mapping")
            for bad in ("seed", "data_root", "fallback_reference"):
                if bad in r:
                    raise ConfigError(f"runs[{i}]: '{bad}' is set at the top level")
            try:
                runs.append(TrainConfig.from_dict(r))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"runs[{i}]: {exc}") from None
        kw = {k: d[k] for k in ("name", "output_dir", "seeds", "data_root", "fallback_reference",
                                "checkpoint_every") if k in d}
        if "seeds" in kw:
            kw["seeds"] = [int(s) for s in kw["seeds"]]
        exp = cls(runs=runs, **kw)
        exp.validate()
        return exp


def run_label(cfg: TrainConfig) -> str:
    return f"{cfg.problem}-{cfg.mode}"


def _with(cfg: TrainConfig, **kw) -> TrainConfig:
    d = cfg.to_dict()
    d.update(kw)
    return TrainConfig.from_dict(d)


HEADER = """\
# Experiment configuration.
# lambda1 weights the boundary terms of the physics loss, lambda2 the labeled-sample
# term of the augmented loss and lam the boundary terms of the weighted loss (all 1).
# adam_beta1/adam_beta2/adam_eps are the usual Adam constants.
# pw_boundary holds one {q, e} entry per boundary term (null = unweighted);
# pw_termination is hl_mass (stop when weight on hard points <= pw_epsilon) or literal.
"""


def dump_config(exp: ExperimentConfig) -> str:
    return HEADER + yaml.safe_dump(exp.to_dict(), sort_keys=False, default_flow_style=None)


def save_config(exp: ExperimentConfig, path) -> None:
    Path(path).write_text(dump_config(exp))


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig.from_dict(data)
