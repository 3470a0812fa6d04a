"""Frequency-truncated defocusing NLS flow on the disc.

The equation i u_t + Lap u - P_{<=N}(|u|^{2k} u) = 0 restricted to the modes
with lam_n <= N is integrated in the interaction picture: the linear phases
exp(-i lam_n^2 t) are applied exactly and classical RK4 handles only the
projected nonlinearity.  Mass and Hamiltonian of the semi-discrete system
are conserved by the continuous-time flow, so their drift is a direct
readout of time-integration error and is monitored online.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import caching
from .basis import SpectralBasis, SpectralField, mode_mask, synthesize

__all__ = [
    "FlowConfig",
    "Trajectory",
    "ConservationError",
    "default_dt",
    "nonlinearity",
    "mass",
    "hamiltonian",
    "evolve",
    "evolve_batch",
    "flow_property_check",
]


class ConservationError(RuntimeError):
    """Mass or Hamiltonian drifted past the configured abort threshold."""


def default_dt(N: float) -> float:
    return min(1e-3, 0.1 / N)


@dataclass(frozen=True)
class FlowConfig:
    """Truncated-flow parameters.

    picture selects what Trajectory.states holds; integration always happens
    on the interaction-picture coefficients.  nonlinear=False drops the
    nonlinearity entirely (the flow becomes the exact linear rotation).
    """

    k: int
    N: float
    dt: float | None = None
    picture: str = "interaction"
    nonlinear: bool = True
    store_stride: int = 1
    drift_abort: float = 1e-4

    def resolved_dt(self) -> float:
        return self.dt if self.dt is not None else default_dt(self.N)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.picture not in ("physical", "interaction"):
            raise ValueError(f"unknown picture {self.picture!r}")
        if self.store_stride < 1:
            raise ValueError("store_stride must be >= 1")


@dataclass
class Trajectory:
    """Sampled states of one truncated-flow run plus conserved-quantity log."""

    times: np.ndarray
    states: np.ndarray  # (n_times, ..., mode_count) coefficients in `picture`
    picture: str
    mass_log: np.ndarray
    hamiltonian_log: np.ndarray
    config: FlowConfig
    lam: np.ndarray

    @property
    def n_times(self) -> int:
        return self.times.size

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        if self.n_times < 3:
            return True
        steps = np.diff(self.times)
        return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))

    def _convert(self, coeffs: np.ndarray, i: int, target: str) -> np.ndarray:
        if target == self.picture:
            return coeffs
        sign = -1.0 if target == "physical" else 1.0
        return coeffs * np.exp(sign * 1j * self.lam**2 * self.times[i])

    def interaction_coeffs(self, i: int) -> np.ndarray:
        return self._convert(self.states[i], i, "interaction")

    def physical_coeffs(self, i: int) -> np.ndarray:
        return self._convert(self.states[i], i, "physical")

    def field_at(self, i: int) -> SpectralField:
        return SpectralField(
            self.states[i].copy(), k=self.config.k, support_bound=self.config.N
        )

    def to_picture(self, picture: str) -> "Trajectory":
        if picture == self.picture:
            return self
        phases = np.exp(
            (-1.0 if picture == "physical" else 1.0)
            * 1j
            * np.outer(self.times, self.lam**2)
        )
        shape = [self.n_times] + [1] * (self.states.ndim - 2) + [self.lam.size]
        return replace(
            self, states=self.states * phases.reshape(shape), picture=picture
        )

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            cols = ["time"]
            for n in range(1, self.lam.size + 1):
                cols += [f"re_{n}", f"im_{n}"]
            cols += ["mass", "hamiltonian"]
            f.write(",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [f"{t:.12g}"]
                for c in self.states[i]:
                    row += [f"{c.real:.17g}", f"{c.imag:.17g}"]
                row += [f"{self.mass_log[i]:.17g}", f"{self.hamiltonian_log[i]:.17g}"]
                f.write(",".join(row) + "\n")

    _CACHE_KIND = "trajectory"

    def save(self, path) -> None:
        caching.write_blob(
            path,
            self._CACHE_KIND,
            meta={
                "picture": self.picture,
                "k": self.config.k,
                "N": self.config.N,
                "dt": self.config.resolved_dt(),
            },
            arrays={
                "times": self.times,
                "states": self.states,
                "mass": self.mass_log,
                "hamiltonian": self.hamiltonian_log,
                "lam": self.lam,
            },
        )

    @classmethod
    def load(cls, path) -> "Trajectory":
        meta, arrays = caching.read_blob(path, cls._CACHE_KIND)
        config = FlowConfig(k=int(meta["k"]), N=float(meta["N"]), dt=float(meta["dt"]))
        return cls(
            times=arrays["times"],
            states=arrays["states"],
            picture=str(meta["picture"]),
            mass_log=arrays["mass"],
            hamiltonian_log=arrays["hamiltonian"],
            config=config,
            lam=arrays["lam"],
        )


def _field_coeffs(basis: SpectralBasis, field) -> np.ndarray:
    c = field.coeffs if isinstance(field, SpectralField) else np.asarray(field, complex)
    out = np.zeros(basis.mode_count, dtype=complex)
    out[: c.shape[-1]] = c
    return out


def nonlinearity(basis: SpectralBasis, field, k: int, N: float) -> SpectralField:
    """Coefficients of P_{<=N}(|u|^{2k} u) for a field supported in E_N."""
    if basis.product_order < 2 * k + 2:
        raise ValueError(
            f"basis product_order {basis.product_order} < {2 * k + 2}: the "
            f"quadrature cannot resolve |u|^{2 * k} u without aliasing"
        )
    c = _field_coeffs(basis, field)
    mask = mode_mask(basis, N)
    if np.any(np.abs(c[~mask]) > 0):
        raise ValueError("field has support above the truncation frequency N")
    g = synthesize(basis, c)
    f = (np.abs(g) ** (2 * k)) * g
    coeffs = ((f * basis.quad.weights) @ basis.values.T) * mask
    return SpectralField(coeffs, k=k, support_bound=N)


def mass(field_or_coeffs) -> float:
    """M(u) = (1/2) int |u|^2, identical in either picture."""
    c = (
        field_or_coeffs.coeffs
        if isinstance(field_or_coeffs, SpectralField)
        else np.asarray(field_or_coeffs)
    )
    return float(0.5 * np.sum(np.abs(c) ** 2, axis=-1))


def hamiltonian(basis: SpectralBasis, physical_coeffs, k: int) -> np.ndarray:
    """H_k(u) = (1/2) int |grad u|^2 + 1/(2k+2) int |u|^{2k+2} (physical picture)."""
    c = np.asarray(physical_coeffs, dtype=complex)
    lam = basis.lam[: c.shape[-1]]
    kinetic = 0.5 * np.sum(lam**2 * np.abs(c) ** 2, axis=-1)
    g = synthesize(basis, c)
    potential = (np.abs(g) ** (2 * k + 2)) @ basis.quad.weights / (2 * k + 2)
    return kinetic + potential


def _batch_hamiltonian(basis, lam, v, t, k):
    u = v * np.exp(-1j * lam**2 * t)
    return hamiltonian(basis, u, k)


def evolve_batch(
    basis: SpectralBasis, coeffs0: np.ndarray, t_final: float, config: FlowConfig
) -> Trajectory:
    """Integrate a batch of initial coefficient rows under one truncated flow.

    coeffs0 has shape (..., mode_count); all rows share the configuration and
    are advanced in lockstep (each row evolves independently of the others).
    """
    if basis.product_order < 2 * config.k + 2 and config.nonlinear:
        raise ValueError(
            f"basis product_order {basis.product_order} < {2 * config.k + 2}: "
            "aliasing hazard in the nonlinearity"
        )
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    lam = basis.lam
    mask = mode_mask(basis, config.N)
    v = np.array(np.atleast_2d(coeffs0), dtype=complex)
    if v.shape[-1] != basis.mode_count:
        padded = np.zeros(v.shape[:-1] + (basis.mode_count,), dtype=complex)
        padded[..., : v.shape[-1]] = v
        v = padded
    if np.any(np.abs(v[..., ~mask]) > 0):
        raise ValueError("initial data has support above the truncation frequency N")

    dt_req = config.resolved_dt()
    n_steps = max(1, round(t_final / dt_req)) if t_final > 0 else 0
    dt = t_final / n_steps if n_steps else dt_req
    lam2 = lam**2
    V = basis.values
    VwT = (V * basis.quad.weights).T
    k = config.k

    def rhs(t, v):
        ph = np.exp(-1j * lam2 * t)
        u = v * ph
        g = u @ V
        f = (np.abs(g) ** (2 * k)) * g
        return -1j * np.conj(ph) * ((f @ VwT) * mask)

    stride = config.store_stride
    store_idx = list(range(0, n_steps + 1, stride))
    if store_idx[-1] != n_steps:
        store_idx.append(n_steps)
    times = np.array([i * dt for i in store_idx])
    states = np.empty((len(store_idx),) + v.shape, dtype=complex)
    mass_log = np.empty((len(store_idx),) + v.shape[:-1])
    ham_log = np.empty_like(mass_log)

    def record(slot, t, v):
        states[slot] = v
        mass_log[slot] = mass(v)
        ham_log[slot] = _batch_hamiltonian(basis, lam, v, t, k)

    record(0, 0.0, v)
    m0, h0 = mass_log[0], ham_log[0]
    slot = 1
    t = 0.0
    for step in range(1, n_steps + 1):
        if config.nonlinear:
            k1 = rhs(t, v)
            k2 = rhs(t + dt / 2, v + (dt / 2) * k1)
            k3 = rhs(t + dt / 2, v + (dt / 2) * k2)
            k4 = rhs(t + dt, v + dt * k3)
            v = v + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = step * dt
        if slot < len(store_idx) and step == store_idx[slot]:
            record(slot, t, v)
            m_rel = np.max(np.abs(mass_log[slot] - m0) / np.maximum(m0, 1e-300))
            # the Hamiltonian is conserved only by the full nonlinear flow
            h_rel = (
                np.max(np.abs(ham_log[slot] - h0) / np.maximum(np.abs(h0), 1e-300))
                if config.nonlinear
                else 0.0
            )
            if max(m_rel, h_rel) > config.drift_abort:
                raise ConservationError(
                    f"conservation drift {max(m_rel, h_rel):.3e} at t={t:.6g} "
                    f"exceeds abort threshold {config.drift_abort:.1e} "
                    f"(dt={dt:.3e}, N={config.N}, k={k})"
                )
            slot += 1

    traj = Trajectory(
        times=times,
        states=states,
        picture="interaction",
        mass_log=mass_log,
        hamiltonian_log=ham_log,
        config=config,
        lam=lam,
    )
    return traj.to_picture(config.picture)


def evolve(basis: SpectralBasis, u0, t_final: float, config: FlowConfig) -> Trajectory:
    """Integrate one initial field; see evolve_batch."""
    c0 = _field_coeffs(basis, u0)
    traj = evolve_batch(basis, c0[None, :], t_final, config)
    traj.states = traj.states[:, 0, :]
    traj.mass_log = traj.mass_log[:, 0]
    traj.hamiltonian_log = traj.hamiltonian_log[:, 0]
    return traj


def flow_property_check(
    basis: SpectralBasis, u0, s: float, t: float, config: FlowConfig
) -> float:
    """L2 distance between the composed flow (s, then t) and the direct flow to s+t."""
    if s < 0 or t < 0:
        raise ValueError("s and t must be >= 0")
    c0 = _field_coeffs(basis, u0)

    def final_physical(c, horizon):
        if horizon == 0:
            return c.copy()
        traj = evolve_batch(basis, c[None, :], horizon, config)
        return traj.to_picture("physical").states[-1, 0]

    u_s = final_physical(c0, s)
    u_st = final_physical(u_s, t)
    u_direct = final_physical(c0, s + t)
    return float(np.sqrt(np.sum(np.abs(u_st - u_direct) ** 2)))
