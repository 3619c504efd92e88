"""Reference solutions: the plain-text dataset format and in-repo fallback oracles.

Dataset files hold one sample per line, whitespace-separated: coordinates
first, then solution components. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .problems import BURGERS_NU, PdeProblem

DATA_ROOT_ENV = "GAPINN_DATA_ROOT"


class DatasetParseError(ValueError):
    pass


class MissingDatasetError(FileNotFoundError):
    pass


@dataclass(frozen=True)
class TestSet:
    """Points with exact (or high-accuracy) solution values.

    Also used for the small labeled set of the adversarial trainer.
    """

    __test__ = False  # not a pytest class

    x: np.ndarray
    u: np.ndarray
    source: str = "analytic"

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        u = np.asarray(self.u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if len(x) != len(u):
            raise ValueError(f"{len(x)} points but {len(u)} solution rows")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    def __len__(self) -> int:
        return len(self.x)

    def subset(self, idx) -> "TestSet":
        return TestSet(self.x[idx], self.u[idx], self.source)


def load_reference_dataset(path, input_dim: int, output_dim: int) -> TestSet:
    path = Path(path)
    if not path.exists():
        raise MissingDatasetError(f"reference dataset not found: {path}")
    ncol = input_dim + output_dim
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != ncol:
                raise DatasetParseError(f"{path}:{lineno}: expected {ncol} columns, found {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise DatasetParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DatasetParseError(f"{path}: no samples")
    data = np.array(rows)
    return TestSet(data[:, :input_dim], data[:, input_dim:], source=f"file:{path.name}")


def write_reference_dataset(path, data: TestSet, columns=None) -> None:
    path = Path(path)
    with path.open("w") as fh:
        if columns:
            fh.write("# " + " ".join(columns) + "\n")
        for xi, ui in zip(data.x, data.u):
            fh.write(" ".join(repr(float(v)) for v in (*xi, *ui)) + "\n")


# ---------------------------------------------------------------------------
# fallback oracles
# ---------------------------------------------------------------------------


def burgers_cole_hopf(t: np.ndarray, x: np.ndarray, nu: float = BURGERS_NU, nodes: int = 2000,
                      width: float = 7.0) -> np.ndarray:
    """Viscous Burgers with u(0, x) = -sin(pi x) via the Cole-Hopf integral.

    u(t, x) = -int sin(pi(x-e)) f(x-e) g(e) de / int f(x-e) g(e) de with
    f(y) = exp(-cos(pi y) / (2 pi nu)) and g(e) = exp(-e^2 / (4 nu t)),
    evaluated by the trapezoid rule in e = sqrt(4 nu t) z, z in [-width, width].
    Returns an array of shape (len(t), len(x)).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    z = np.linspace(-width, width, nodes)
    out = np.empty((len(t), len(x)))
    for i, ti in enumerate(t):
        if ti <= 0.0:
            out[i] = -np.sin(np.pi * x)
            continue
        eta = np.sqrt(4.0 * nu * ti) * z
        y = x[:, None] - eta[None, :]
        logw = -np.cos(np.pi * y) / (2.0 * np.pi * nu) - z[None, :] ** 2
        w = np.exp(logw - logw.max(axis=1, keepdims=True))
        out[i] = -np.trapezoid(np.sin(np.pi * y) * w, z, axis=1) / np.trapezoid(w, z, axis=1)
    return out


def schrodinger_split_step(t_out: np.ndarray, nx: int = 256, substeps: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Focusing NLS i h_t + 0.5 h_xx + |h|^2 h = 0 on periodic [-5, 5), h(0, x) = 2 sech x.

    Strang split-step Fourier. Returns (x grid, h of shape (len(t_out), nx)).
    """
    t_out = np.asarray(t_out, dtype=float)
    x = np.linspace(-5.0, 5.0, nx, endpoint=False)
    k = 2.0 * np.pi * np.fft.fftfreq(nx, d=10.0 / nx)
    h = (2.0 / np.cosh(x)).astype(complex)
    out = np.empty((len(t_out), nx), dtype=complex)
    t = 0.0
    for i, target in enumerate(t_out):
        span = target - t
        if span > 0:
            n = max(1, int(np.ceil(span / (np.pi / 2 / 200) * substeps)))
            dt = span / n
            lin = np.exp(-0.5j * k * k * dt)
            for _ in range(n):
                h = h * np.exp(0.5j * dt * np.abs(h) ** 2)
                h = np.fft.ifft(lin * np.fft.fft(h))
                h = h * np.exp(0.5j * dt * np.abs(h) ** 2)
            t = target
        out[i] = h
    return x, out


@lru_cache(maxsize=4)
def _burgers_grid(nt: int, nx: int, nodes: int) -> TestSet:
    t = np.linspace(0.0, 0.99, nt)
    x = np.linspace(-1.0, 1.0, nx)
    u = burgers_cole_hopf(t, x, nodes=nodes)
    T, X = np.meshgrid(t, x, indexing="ij")
    return TestSet(np.stack([T.ravel(), X.ravel()], 1), u.reshape(-1, 1), source="fallback:burgers_cole_hopf")


@lru_cache(maxsize=4)
def _schrodinger_grid(nt: int, nx: int) -> TestSet:
    t = np.linspace(0.0, np.pi / 2, nt)
    x, h = schrodinger_split_step(t, nx=nx)
    T, X = np.meshgrid(t, x, indexing="ij")
    u = np.stack([h.real.ravel(), h.imag.ravel()], 1)
    return TestSet(np.stack([T.ravel(), X.ravel()], 1), u, source="fallback:schrodinger_split_step")


def fallback_reference(name: str, resolution: str = "standard") -> TestSet:
    """In-repo oracle on the published grids (coarse grid for desk-scale runs)."""
    coarse = resolution == "coarse"
    if name == "burgers_cole_hopf":
        return _burgers_grid(25, 64, 2000) if coarse else _burgers_grid(100, 256, 2000)
    if name == "schrodinger_split_step":
        return _schrodinger_grid(26, 64) if coarse else _schrodinger_grid(201, 256)
    raise ValueError(f"unknown fallback oracle {name!r}")


def data_root(explicit=None) -> Path | None:
    if explicit:
        return Path(explicit)
    env = os.environ.get(DATA_ROOT_ENV)
    return Path(env) if env else None


def reference_path(problem: PdeProblem, root=None) -> Path | None:
    base = data_root(root)
    if problem.reference is None or base is None:
        return None
    return base / problem.reference.filename


def resolve_reference(problem: PdeProblem, root=None, fallback: bool = False,
                      resolution: str = "standard") -> TestSet:
    """Reference test set for a problem without a closed form."""
    if problem.reference is None:
        raise ValueError(f"{problem.name} has an analytic solution and no reference dataset")
    path = reference_path(problem, root)
    if path is not None and path.exists():
        return load_reference_dataset(path, problem.input_dim, problem.output_dim)
    if fallback:
        return fallback_reference(problem.reference.fallback, resolution)
    where = path if path is not None else f"${DATA_ROOT_ENV}/{problem.reference.filename}"
    raise MissingDatasetError(
        f"{problem.name} needs the reference dataset {where}; pass --fallback-reference to use the in-repo oracle"
    )
