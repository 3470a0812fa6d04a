"""Gaussian random data on the disc and the weighted (defocusing) ensemble.

Plain draws put independent complex Gaussians g_n (E|g_n|^2 = 1) on the modes
with lam_n <= N, scaled by 1/(pi lam_n).  Mode n of a draw is generated from
the seed path (seed, ..., n), so truncating a draw to a lower frequency box
reproduces the draw at that truncation exactly (common random numbers across
dyadic levels).  The weighted ensemble reweights by exp(-V) with
V = 1/(2k+2) int |u|^{2k+2}; rejection gives exact samples since the weight
never exceeds one, with a self-normalized importance-sampling estimator as
the fallback for large potentials.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import multiprocessing
import numpy as np

from .basis import SpectralBasis, SpectralField, mode_mask, synthesize
from .flow import FlowConfig, evolve_batch, mass

__all__ = [
    "GaussianDraw",
    "GibbsSample",
    "RejectionError",
    "sample_gff",
    "sample_gibbs",
    "potential",
    "importance_expectation",
    "make_observable",
    "invariance_test",
]


class RejectionError(RuntimeError):
    """Rejection sampling hit the attempt cap; use importance_expectation instead."""


@dataclass
class GaussianDraw:
    """One draw of the Gaussian field: raw unit Gaussians g_n and coefficients g_n/(pi lam_n)."""

    seed: tuple
    coeffs: np.ndarray
    g: np.ndarray
    N: float
    k: int

    @property
    def field(self) -> SpectralField:
        return SpectralField(self.coeffs.copy(), k=self.k, support_bound=self.N)


@dataclass
class GibbsSample:
    field: SpectralField
    potential: float
    accepted: bool
    attempts: int


def _seed_path(seed) -> tuple:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def _unit_complex_gaussians(path: tuple, mode_indices) -> np.ndarray:
    out = np.empty(len(mode_indices), dtype=complex)
    for slot, n in enumerate(mode_indices):
        rng = np.random.default_rng(np.random.SeedSequence(list(path) + [int(n)]))
        re, im = rng.normal(0.0, math.sqrt(0.5), 2)
        out[slot] = re + 1j * im
    return out


def sample_gff(basis: SpectralBasis, N: float, k: int, seed) -> GaussianDraw:
    """Draw the Gaussian field truncated to lam_n <= N; deterministic in seed."""
    path = _seed_path(seed)
    mask = mode_mask(basis, N)
    modes = np.nonzero(mask)[0] + 1
    g = np.zeros(basis.mode_count, dtype=complex)
    g[modes - 1] = _unit_complex_gaussians(path, modes)
    coeffs = np.zeros(basis.mode_count, dtype=complex)
    coeffs[mask] = g[mask] / (np.pi * basis.lam[mask])
    return GaussianDraw(seed=path, coeffs=coeffs, g=g, N=N, k=k)


def potential(basis: SpectralBasis, field_or_coeffs, k: int) -> float:
    """V(u) = 1/(2k+2) int_D |u|^{2k+2} dx."""
    c = (
        field_or_coeffs.coeffs
        if isinstance(field_or_coeffs, SpectralField)
        else np.asarray(field_or_coeffs, dtype=complex)
    )
    g = synthesize(basis, c)
    return (np.abs(g) ** (2 * k + 2)) @ basis.quad.weights / (2 * k + 2)


def sample_gibbs(
    basis: SpectralBasis,
    N: float,
    k: int,
    seed,
    potential_scale: float = 1.0,
    max_attempts: int = 10000,
) -> GibbsSample:
    """Exact sample of the exp(-V)-weighted Gaussian ensemble by rejection.

    potential_scale multiplies V in the acceptance weight (scale 0 recovers
    the plain Gaussian field; used by tests to steer the acceptance rate).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    path = _seed_path(seed)
    for attempt in range(max_attempts):
        draw = sample_gff(basis, N, k, path + (attempt,))
        v = potential(basis, draw.coeffs, k)
        # mode tag 0 is never used by coefficient streams
        urng = np.random.default_rng(
            np.random.SeedSequence(list(path) + [attempt, 0])
        )
        if urng.uniform() <= math.exp(-potential_scale * v):
            return GibbsSample(
                field=SpectralField(draw.coeffs, k=k, support_bound=N),
                potential=float(v),
                accepted=True,
                attempts=attempt + 1,
            )
    raise RejectionError(
        f"no acceptance in {max_attempts} attempts (N={N}, k={k}); "
        "the potential is too large for rejection, use importance_expectation"
    )


def importance_expectation(
    basis: SpectralBasis,
    N: float,
    k: int,
    observable,
    n_samples: int,
    seed,
    potential_scale: float = 1.0,
):
    """Self-normalized importance-sampling estimate of a weighted-ensemble mean.

    Returns (estimate, stderr).  observable maps a coefficient row to a float.
    """
    path = _seed_path(seed)
    vals = np.empty(n_samples)
    logw = np.empty(n_samples)
    for i in range(n_samples):
        draw = sample_gff(basis, N, k, path + (i,))
        vals[i] = observable(draw.coeffs)
        logw[i] = -potential_scale * potential(basis, draw.coeffs, k)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    est = float(np.sum(w * vals))
    # delta-method variance of the ratio estimator
    var = float(np.sum(w**2 * (vals - est) ** 2))
    return est, math.sqrt(var)


def make_observable(name: str):
    """Named observables: mass, potential, abs2:<n>, re:<n>."""
    if name == "mass":
        return lambda basis, k, coeffs: mass(coeffs)
    if name == "potential":
        return lambda basis, k, coeffs: potential(basis, coeffs, k)
    if ":" in name:
        kind, _, num = name.partition(":")
        n = int(num)
        if kind == "abs2":
            return lambda basis, k, coeffs: float(np.abs(coeffs[..., n - 1]) ** 2)
        if kind == "re":
            return lambda basis, k, coeffs: float(coeffs[..., n - 1].real)
    raise ValueError(f"unknown observable {name!r}")


def _observable_batch(basis, k, fn, coeff_rows) -> np.ndarray:
    return np.array([fn(basis, k, row) for row in coeff_rows])


def _invariance_chunk(
    indices, basis, N, k, t, seed, potential_scale, flow: FlowConfig
):
    rows0 = np.empty((len(indices), basis.mode_count), dtype=complex)
    attempts = 0
    for slot, i in enumerate(indices):
        sample = sample_gibbs(basis, N, k, (seed, i), potential_scale)
        rows0[slot] = sample.field.coeffs
        attempts += sample.attempts
    if t > 0:
        traj = evolve_batch(basis, rows0, t, flow)
        rowsT = traj.to_picture("physical").states[-1]
    else:
        rowsT = rows0.copy()
    return rows0, rowsT, attempts


def invariance_test(
    basis: SpectralBasis,
    N: float,
    k: int,
    t: float,
    n_samples: int,
    observables,
    seed,
    dt: float | None = None,
    nonlinear: bool = True,
    potential_scale: float = 1.0,
    workers: int = 1,
) -> dict:
    """Monte Carlo invariance check of the weighted ensemble under the truncated flow.

    Draws n_samples exact samples, evolves each to time t and reports, per
    observable, z = (mean_0 - mean_t) / sqrt(se_0^2 + se_t^2).  Exactly zero
    differences give z = 0 exactly.
    """
    if n_samples < 100:
        raise ValueError("n_samples < 100: the invariance test is underpowered")
    names = list(observables)
    fns = [make_observable(name) for name in names]
    flow = FlowConfig(k=k, N=N, dt=dt, picture="interaction", nonlinear=nonlinear)

    chunks = [list(range(n_samples))]
    if workers > 1:
        bounds = np.linspace(0, n_samples, workers + 1).astype(int)
        chunks = [list(range(a, b)) for a, b in zip(bounds, bounds[1:]) if b > a]
    job = partial(
        _invariance_chunk,
        basis=basis,
        N=N,
        k=k,
        t=t,
        seed=seed,
        potential_scale=potential_scale,
        flow=flow,
    )
    if len(chunks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=len(chunks), mp_context=ctx) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(chunks[0])]
    rows0 = np.concatenate([p[0] for p in parts])
    rowsT = np.concatenate([p[1] for p in parts])
    attempts = sum(p[2] for p in parts)

    results = []
    for name, fn in zip(names, fns):
        a = _observable_batch(basis, k, fn, rows0)
        b = _observable_batch(basis, k, fn, rowsT)
        diff = a.mean() - b.mean()
        stderr = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        if diff == 0.0:
            z = 0.0
        elif stderr == 0.0:
            z = math.inf if diff > 0 else -math.inf
        else:
            z = diff / stderr
        results.append(
            {
                "observable": name,
                "mean0": float(a.mean()),
                "meanT": float(b.mean()),
                "stderr": float(stderr),
                "z": float(z),
            }
        )
    return {
        "N": N,
        "k": k,
        "t": t,
        "n_samples": n_samples,
        "seed": _seed_path(seed),
        "mean_attempts": attempts / n_samples,
        "observables": results,
    }
