"""Desk-scale ensemble harness: seeded initial conditions, parallel
trajectory sweeps under the PT drive, convergence statistics, and the
comparison against the analytic instanton envelope.

Reproducibility contract: the RNG is numpy's Philox counter-based
generator (versioned bit stream, stable across platforms), all sampling
happens up front in index order, and results are gathered by sample index,
so a run is bit-identical for a fixed spec regardless of the worker count.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .drive import DriveSpec, ModelParams
from .hamiltonian import AssembledHamiltonian, HamiltonianBuilder
from .hilbert import CavityPrep, FockTruncation, prepare_state
from .integrator import IntegratorConfig, TrajectoryRecord, evolve

__all__ = [
    "EnsembleSpec",
    "TrajectoryOutcome",
    "EnsembleSummary",
    "sample_initial_conditions",
    "run_ensemble",
    "fit_alpha",
    "time_to_threshold",
]

WORKERS_ENV_VAR = "PTRABI_WORKERS"
RNG_NAME = "numpy.random.Philox"


@dataclass(frozen=True)
class EnsembleSpec:
    """Full recipe for one ensemble run (everything that affects the output)."""

    n_samples: int
    seed: int
    drive: DriveSpec
    params: ModelParams
    integrator: IntegratorConfig
    cavity_mean_range: tuple = (0.0, 5.0)
    cavity_prep_kind: str = "coherent"  # coherent | fock_rounded
    convergence_threshold: float = -0.99
    half_qubit_term: bool = True

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        lo, hi = self.cavity_mean_range
        if not 0 <= lo <= hi:
            raise ValueError(f"cavity_mean_range must satisfy 0 <= lo <= hi, got {self.cavity_mean_range}")
        if self.cavity_prep_kind not in ("coherent", "fock_rounded"):
            raise ValueError(f"unknown cavity_prep_kind {self.cavity_prep_kind!r}")
        if not self.integrator.sample_times:
            raise ValueError("integrator.sample_times must be set for ensemble runs")
        object.__setattr__(self, "cavity_mean_range", (float(lo), float(hi)))
        n_rec = hi + 10.0 * math.sqrt(hi)
        if self.params.trunc.n_max < n_rec:
            warnings.warn(
                f"n_max={self.params.trunc.n_max} is below the recommended "
                f"hi + 10*sqrt(hi) = {n_rec:.1f} for cavity means up to {hi}",
                stacklevel=2,
            )


@dataclass(frozen=True)
class TrajectoryOutcome:
    """Per-sample convergence result."""

    index: int
    theta: float
    phi: float
    cavity_mean: float
    time_to_threshold: float  # inf when the threshold was never reached
    final_sigma_z: float
    final_ground_fidelity: float
    trusted: bool


@dataclass
class EnsembleSummary:
    """Aggregates over trusted trajectories plus the per-sample table.

    The reference trajectory (theta = 0, vacuum cavity) realizes the
    analytic outer-bound initial condition; its fitted rate and threshold
    time are recorded for comparison, and ordering violations count the
    trusted samples that needed longer than the reference (soft check:
    those exceeding it by more than 10% are tallied separately).
    """

    spec_seed: int
    n_samples: int
    n_trusted: int
    n_untrusted: int
    fraction_converged: float
    max_time_to_threshold: float
    median_time_to_threshold: float
    reference_time_to_threshold: float
    alpha_fit: float
    alpha_fit_rms: float
    n_exceed_reference: int
    n_exceed_reference_10pct: int
    soft_ordering_ok: bool
    per_trajectory: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.spec_seed,
            "rng": RNG_NAME,
            "n_samples": self.n_samples,
            "n_trusted": self.n_trusted,
            "n_untrusted": self.n_untrusted,
            "fraction_converged": self.fraction_converged,
            "max_time_to_threshold": _json_float(self.max_time_to_threshold),
            "median_time_to_threshold": _json_float(self.median_time_to_threshold),
            "reference_time_to_threshold": _json_float(self.reference_time_to_threshold),
            "alpha_fit": self.alpha_fit,
            "alpha_fit_rms": self.alpha_fit_rms,
            "n_exceed_reference": self.n_exceed_reference,
            "n_exceed_reference_10pct": self.n_exceed_reference_10pct,
            "soft_ordering_ok": self.soft_ordering_ok,
            "per_trajectory": [
                {
                    "index": o.index,
                    "theta": o.theta,
                    "phi": o.phi,
                    "cavity_mean": o.cavity_mean,
                    "time_to_threshold": _json_float(o.time_to_threshold),
                    "final_sigma_z": o.final_sigma_z,
                    "final_ground_fidelity": o.final_ground_fidelity,
                    "trusted": o.trusted,
                }
                for o in self.per_trajectory
            ],
        }


def _json_float(x: float):
    # JSON has no Infinity literal; keep summaries strictly portable
    if math.isinf(x):
        return "inf"
    return x


def sample_initial_conditions(spec: EnsembleSpec) -> np.ndarray:
    """(n_samples, 3) array of (theta, phi, cavity_mean), area-uniform on the sphere.

    cos(theta) is uniform on [-1, 1], phi uniform on [0, 2π), and the cavity
    mean uniform on the configured range; all drawn from Philox(seed) in one
    pass so the sequence is platform-stable and independent of scheduling.
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    u = rng.random((spec.n_samples, 3))
    lo, hi = spec.cavity_mean_range
    out = np.empty((spec.n_samples, 3))
    out[:, 0] = np.arccos(1.0 - 2.0 * u[:, 0])
    out[:, 1] = 2.0 * math.pi * u[:, 1]
    out[:, 2] = lo + (hi - lo) * u[:, 2]
    return out


def time_to_threshold(times: np.ndarray, sz: np.ndarray, threshold: float) -> float:
    """First crossing time of sz <= threshold, linearly interpolated; inf if never."""
    below = sz <= threshold
    if not below.any():
        return math.inf
    i = int(np.argmax(below))
    if i == 0:
        return float(times[0])
    t0, t1 = times[i - 1], times[i]
    v0, v1 = sz[i - 1], sz[i]
    return float(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))


# worker-process context, set once per worker by _init_worker
_WORK: dict = {}


def _init_worker(payload):
    _WORK["assembled"], _WORK["config"], _WORK["n_max"], _WORK["threshold"], _WORK["prep_kind"] = payload


def _cavity_prep(kind: str, mean: float, n_max: int) -> CavityPrep:
    if kind == "coherent":
        return CavityPrep(kind="coherent", mean_photons=mean)
    level = min(int(round(mean)), n_max)
    return CavityPrep(kind="fock", fock_level=level)


def _run_one(task):
    index, theta, phi, mean, keep = task
    assembled: AssembledHamiltonian = _WORK["assembled"]
    config: IntegratorConfig = _WORK["config"]
    n_max: int = _WORK["n_max"]
    trunc = FockTruncation(n_max)
    state = prepare_state(theta, phi, _cavity_prep(_WORK["prep_kind"], mean, n_max), trunc)
    rec = evolve(state, assembled, config)
    sz = rec.sz
    t_thr = time_to_threshold(rec.times, sz, _WORK["threshold"])
    final_sz = float(sz[-1])
    outcome = (
        index,
        theta,
        phi,
        mean,
        t_thr,
        final_sz,
        0.5 * (1.0 - final_sz),
        rec.trusted,
    )
    series = None
    if keep:
        series = (rec.sx, rec.sy, sz, rec.photon_expectation, rec.log_norm, rec.leakage)
    return outcome, series


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV_VAR, "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_ensemble(
    spec: EnsembleSpec,
    workers: Optional[int] = None,
    keep_trajectories: int = 0,
):
    """Run the sweep; returns (summary, kept records, reference record).

    The kept records are a decimated, evenly spaced subset for plotting;
    the reference record is the (theta = 0, vacuum) trajectory used for the
    outer-bound comparison and the rate fit.  Untrusted trajectories
    (Fock-cutoff leakage) are excluded from every aggregate and counted in
    ``n_untrusted``.
    """
    workers = _resolve_workers(workers)
    samples = sample_initial_conditions(spec)
    builder = HamiltonianBuilder(
        params=spec.params,
        drive=spec.drive,
        form="full_rabi",
        half_qubit_term=spec.half_qubit_term,
    )
    assembled = builder.assemble()
    n_max = spec.params.trunc.n_max
    payload = (assembled, spec.integrator, n_max, spec.convergence_threshold, spec.cavity_prep_kind)

    n = spec.n_samples
    if keep_trajectories > 0:
        keep_idx = set(np.linspace(0, n - 1, min(n, keep_trajectories)).astype(int).tolist())
    else:
        keep_idx = set()
    tasks = [
        (i, float(samples[i, 0]), float(samples[i, 1]), float(samples[i, 2]), i in keep_idx)
        for i in range(n)
    ]

    if workers == 1:
        _init_worker(payload)
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(payload,)
        ) as pool:
            chunk = max(1, n // (workers * 4))
            results = list(pool.map(_run_one, tasks, chunksize=chunk))

    # reference trajectory: excited qubit, vacuum cavity (the analytic
    # outer-bound initial condition), always run in the parent process
    _init_worker(payload)
    ref_state = prepare_state(0.0, 0.0, CavityPrep(kind="vacuum"), FockTruncation(n_max))
    ref_rec = evolve(ref_state, assembled, spec.integrator)
    ref_rec.drive_meta = spec.drive
    ref_rec.params_meta = spec.params
    ref_time = time_to_threshold(ref_rec.times, ref_rec.sz, spec.convergence_threshold)
    alpha_fit, alpha_rms = fit_alpha(ref_rec)

    outcomes = []
    kept_records = []
    times = np.array(spec.integrator.sample_times)
    for outcome, series in results:
        o = TrajectoryOutcome(*outcome)
        outcomes.append(o)
        if series is not None:
            sx, sy, sz, nph, lg, leak = series
            from .hilbert import BlochVector  # local import avoids a cycle at module load

            kept_records.append(
                TrajectoryRecord(
                    times=times,
                    bloch=[BlochVector(x=float(a), y=float(b), z=float(c)) for a, b, c in zip(sx, sy, sz)],
                    photon_expectation=nph,
                    log_norm=lg,
                    leakage=leak,
                    drive_meta=spec.drive,
                    params_meta=spec.params,
                    trusted=bool(np.all(leak < 1e-6)),
                    final_state=None,
                )
            )

    trusted = [o for o in outcomes if o.trusted]
    n_trusted = len(trusted)
    n_untrusted = len(outcomes) - n_trusted
    t_thr = np.array([o.time_to_threshold for o in trusted]) if trusted else np.array([])
    converged = int(np.sum(np.isfinite(t_thr))) if trusted else 0
    fraction = converged / n_trusted if n_trusted else 0.0
    n_exceed = int(np.sum(t_thr > ref_time)) if trusted else 0
    n_exceed_10 = int(np.sum(t_thr > 1.1 * ref_time)) if trusted else 0
    soft_ok = (n_exceed <= 0.01 * n_trusted) and n_exceed_10 == 0 if n_trusted else True

    summary = EnsembleSummary(
        spec_seed=spec.seed,
        n_samples=n,
        n_trusted=n_trusted,
        n_untrusted=n_untrusted,
        fraction_converged=fraction,
        max_time_to_threshold=float(np.max(t_thr)) if t_thr.size else math.inf,
        median_time_to_threshold=float(np.median(t_thr)) if t_thr.size else math.inf,
        reference_time_to_threshold=ref_time,
        alpha_fit=alpha_fit,
        alpha_fit_rms=alpha_rms,
        n_exceed_reference=n_exceed,
        n_exceed_reference_10pct=n_exceed_10,
        soft_ordering_ok=bool(soft_ok),
        per_trajectory=outcomes,
    )
    return summary, kept_records, ref_rec


def fit_alpha(record: TrajectoryRecord, alpha_max: Optional[float] = None):
    """One-parameter least-squares fit of sz0 (1 - 2 tanh(αt)) to a trajectory.

    Bounded scalar minimization on α ∈ (0, 10 g0] (g0 from the record's
    drive metadata unless alpha_max is given).  A non-monotone trajectory
    still yields a fit; judge it by the returned rms residual.
    Returns (alpha_fit, rms_residual).
    """
    t = np.asarray(record.times, dtype=np.float64)
    sz = record.sz
    if t.size < 20:
        raise ValueError(f"need at least 20 samples to fit, got {t.size}")
    sz0 = float(sz[0])
    if sz0 < 0.5:
        raise ValueError(f"fit model assumes a trajectory starting near sigma_z = +1, got {sz0}")
    if alpha_max is None:
        if record.drive_meta is None:
            raise ValueError("record carries no drive metadata; pass alpha_max explicitly")
        alpha_max = 10.0 * record.drive_meta.g0

    def rms(alpha: float) -> float:
        model = sz0 * (1.0 - 2.0 * np.tanh(alpha * t))
        return float(np.sqrt(np.mean((model - sz) ** 2)))

    res = minimize_scalar(rms, bounds=(1e-12, alpha_max), method="bounded", options={"xatol": 1e-12})
    return float(res.x), rms(float(res.x))
