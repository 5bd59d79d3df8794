"""Exact-diagonalization experiments on periodic spin chains: XYZ and
transverse-field Ising dynamics, time series of the Pauli-entangling power
and the operator entanglement of the evolution, and long-time averages with
a standard-error stopping rule.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .entpower import pauli_entangling_power
from .errors import NotHermitian, SizeLimitExceeded
from .operators import Bipartition, operator_entanglement
from .paulis import SINGLE_QUBIT_PAULIS

DEFAULT_DT = 0.2
DEFAULT_SEM_THRESHOLD = 2e-2
DEFAULT_N_MIN = 25
DENSE_SITE_LIMIT = 12


@dataclass(frozen=True)
class XYZModel:
    """Nearest-neighbour XYZ chain in a z field, periodic boundary:
    H = sum_i (J_x XX + J_y YY + J_z ZZ + h Z_i)."""

    n_sites: int
    j_x: float = 0.75
    j_y: float = 0.25
    j_z: float = 0.0
    h: float = 0.5


@dataclass(frozen=True)
class TFIMModel:
    """Transverse-field Ising chain with a longitudinal field, periodic:
    H = -sum_i (J ZZ + h Z_i + g X_i)."""

    n_sites: int
    j: float = 1.0
    h: float = 0.0
    g: float = 1.0


SpinChainModel = XYZModel | TFIMModel


def _site_ops(n: int, name: str) -> list[np.ndarray]:
    s = SINGLE_QUBIT_PAULIS[name]
    eye = np.eye(2, dtype=complex)
    ops = []
    for i in range(n):
        m = np.array([[1.0 + 0.0j]])
        for j in range(n):
            m = np.kron(m, s if j == i else eye)
        ops.append(m)
    return ops


def build_hamiltonian(model: SpinChainModel) -> np.ndarray:
    n = model.n_sites
    if n > DENSE_SITE_LIMIT:
        raise SizeLimitExceeded(f"{n} sites exceeds dense limit {DENSE_SITE_LIMIT}")
    d = 1 << n
    ham = np.zeros((d, d), dtype=complex)
    if isinstance(model, XYZModel):
        xs, ys, zs = _site_ops(n, "X"), _site_ops(n, "Y"), _site_ops(n, "Z")
        for i in range(n):
            ni = (i + 1) % n
            ham += model.j_x * xs[i] @ xs[ni]
            ham += model.j_y * ys[i] @ ys[ni]
            ham += model.j_z * zs[i] @ zs[ni]
            ham += model.h * zs[i]
    elif isinstance(model, TFIMModel):
        xs, zs = _site_ops(n, "X"), _site_ops(n, "Z")
        for i in range(n):
            ni = (i + 1) % n
            ham -= model.j * zs[i] @ zs[ni]
            ham -= model.h * zs[i]
            ham -= model.g * xs[i]
    else:
        raise TypeError(f"unknown model type {type(model)!r}")
    return ham


class HamiltonianPropagator:
    """exp(-i H t) for many t from a single eigendecomposition."""

    def __init__(self, ham: np.ndarray, tol: float = 1e-10):
        if np.linalg.norm(ham - ham.conj().T) > tol * max(1.0, np.linalg.norm(ham)):
            raise NotHermitian("propagator needs a Hermitian generator")
        self.energies, self.modes = np.linalg.eigh(ham)

    def unitary_at(self, t: float) -> np.ndarray:
        if t == 0.0:
            return np.eye(self.energies.size, dtype=complex)
        phases = np.exp(-1j * self.energies * t)
        return (self.modes * phases) @ self.modes.conj().T


def evolve_unitary(ham: np.ndarray, t: float) -> np.ndarray:
    """U_t = exp(-i H t) through the eigendecomposition of H."""
    return HamiltonianPropagator(ham).unitary_at(t)


@dataclass
class TimeSeries:
    dt: float
    times: np.ndarray
    values: np.ndarray
    sems: np.ndarray  # per-sample uncertainty (0 for exactly evaluated points)
    n_steps: int
    running_sem: float  # final 1.96 sigma / sqrt(N_t)
    converged: bool


class _RunningStats:
    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0

    def push(self, value: float) -> None:
        self.n += 1
        delta = value - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (value - self.mean)

    def half_width(self) -> float:
        """1.96 sigma / sqrt(N) with the sample standard deviation."""
        if self.n < 2:
            return math.inf
        return 1.96 * math.sqrt(self._m2 / (self.n - 1)) / math.sqrt(self.n)


def long_time_average(
    series: Iterable[float],
    dt: float = DEFAULT_DT,
    sem_threshold: float = DEFAULT_SEM_THRESHOLD,
    n_min: int = DEFAULT_N_MIN,
    max_steps: int = 20000,
) -> tuple[float, TimeSeries]:
    """Running time-mean of samples at t = k dt, stopped at the first
    N_t >= n_min with 1.96 sigma / sqrt(N_t) below the threshold.

    If the series ends (or max_steps is hit) before the rule fires, the
    partial mean is returned with converged=False.
    """
    stats = _RunningStats()
    values: list[float] = []
    converged = False
    for value in series:
        stats.push(float(value))
        values.append(float(value))
        if stats.n >= n_min and stats.half_width() < sem_threshold:
            converged = True
            break
        if stats.n >= max_steps:
            break
    arr = np.asarray(values)
    ts = TimeSeries(
        dt=dt,
        times=dt * np.arange(len(values)),
        values=arr,
        sems=np.zeros(len(values)),
        n_steps=stats.n,
        running_sem=stats.half_width(),
        converged=converged,
    )
    return stats.mean, ts


# ---------------------------------------------------------------------------
# Sweep experiments
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("sweep_value", "n_sites", "mean_PE", "mean_E", "n_steps", "total_samples")


@dataclass
class SweepRow:
    sweep_value: float
    n_sites: int
    mean_pe: float
    mean_e: float
    n_steps: int
    total_samples: int
    converged: bool


def _model_for(family: str, n_sites: int, sweep_value: float,
               fixed: dict | None) -> SpinChainModel:
    fixed = dict(fixed or {})
    if family == "xyz":
        return XYZModel(n_sites=n_sites, j_z=sweep_value, **fixed)
    if family == "tfim":
        return TFIMModel(n_sites=n_sites, h=sweep_value, **fixed)
    raise ValueError(f"unknown model family {family!r}")


def _sweep_point(
    family: str,
    sweep_value: float,
    n_sites: int,
    mode: str,
    dt: float,
    sem_threshold: float,
    n_min: int,
    max_steps: int,
    seed: int | None,
    fixed: dict | None,
    pe_sem_target: float,
) -> SweepRow:
    model = _model_for(family, n_sites, sweep_value, fixed)
    prop = HamiltonianPropagator(build_hamiltonian(model))
    bp = Bipartition(n_sites // 2, n_sites - n_sites // 2)
    rng = np.random.default_rng(seed)
    pe_stats, el_stats = _RunningStats(), _RunningStats()
    total_samples = 0
    converged = False
    for k in range(max_steps):
        u_t = prop.unitary_at(k * dt)
        if mode == "exact":
            est = pauli_entangling_power(u_t, bp, mode="exact")
        else:
            est = pauli_entangling_power(
                u_t, bp, mode="sampled", rng=rng, sem_target=pe_sem_target
            )
        total_samples += est.n_samples
        pe_stats.push(est.value)
        el_stats.push(operator_entanglement(u_t, bp, "linear"))
        if (
            pe_stats.n >= n_min
            and pe_stats.half_width() < sem_threshold
            and el_stats.half_width() < sem_threshold
        ):
            converged = True
            break
    return SweepRow(
        sweep_value=sweep_value,
        n_sites=n_sites,
        mean_pe=pe_stats.mean,
        mean_e=el_stats.mean,
        n_steps=pe_stats.n,
        total_samples=total_samples,
        converged=converged,
    )


def run_sweep_experiment(
    family: str,
    sweep_values: Sequence[float],
    n_sites: int,
    mode: str = "exact",
    output_path: str | None = None,
    dt: float = DEFAULT_DT,
    sem_threshold: float = DEFAULT_SEM_THRESHOLD,
    n_min: int = DEFAULT_N_MIN,
    max_steps: int = 20000,
    seed: int | None = None,
    fixed: dict | None = None,
    pe_sem_target: float = DEFAULT_SEM_THRESHOLD,
    workers: int = 1,
    header_lines: Sequence[str] = (),
) -> list[SweepRow]:
    """Long-time averages of P_E(U_t) and E_lin(U_t) over a parameter sweep
    (j_z for the XYZ family, the longitudinal field for the TFIM family).

    Each sweep value gets an independent child seed derived from `seed`, so
    results do not depend on the worker count; rows are emitted in sweep
    order.  mode="exact" enumerates all Pauli strings per timestep (use for
    n_sites <= 8); mode="sampled" draws strings per timestep until the
    estimator's standard error is below pe_sem_target.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    children = np.random.SeedSequence(seed).spawn(len(sweep_values))
    child_seeds = [int(c.generate_state(1)[0]) for c in children]
    args = [
        (family, float(v), n_sites, mode, dt, sem_threshold, n_min, max_steps,
         child_seeds[i], fixed, pe_sem_target)
        for i, v in enumerate(sweep_values)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point_star, args))
    else:
        rows = [_sweep_point(*a) for a in args]
    if output_path is not None:
        write_sweep_csv(output_path, rows, header_lines)
    return rows


def _sweep_point_star(args) -> SweepRow:
    return _sweep_point(*args)


def write_sweep_csv(path: str, rows: list[SweepRow], header_lines: Sequence[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([
                f"{r.sweep_value:.12g}", r.n_sites, f"{r.mean_pe:.12g}",
                f"{r.mean_e:.12g}", r.n_steps, r.total_samples,
            ])
