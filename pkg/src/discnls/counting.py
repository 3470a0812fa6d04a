"""Resonance bookkeeping: phase function, lattice counts and base tensors.

The phase of a frequency tuple (n, n_1, ..., n_{2k+1}) is the alternating
combination lam_n^2 - lam_{n_1}^2 + lam_{n_2}^2 - ... of squared J0 zeros;
near-resonant tuples are those whose phase falls in a unit window.  The
counting operations here are exact enumerations used to check how the number
of near-resonant tuples grows with the frequency box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bessel import eigenvalues

__all__ = [
    "phase_signs",
    "phase",
    "phase_bucket",
    "PhaseQuery",
    "phase_query",
    "find_pairings",
    "has_pairing",
    "has_simple_pairing",
    "count_diff_pairs",
    "count_sum_pairs",
    "worst_bucket",
    "divisor_count",
    "BaseTensorSpec",
    "base_tensor_entry_count",
    "base_tensor_hs_norm",
    "modes_within",
    "scaling_report",
]

Box = Union[int, Sequence[Sequence[int]]]


def phase_signs(length: int) -> tuple[int, ...]:
    """Signs (+1, -1, +1, ...) carried by the squared frequencies in the phase."""
    return tuple(1 if i % 2 == 0 else -1 for i in range(length))


def phase(indices) -> float:
    """Alternating sum of squared J0 zeros over the index tuple."""
    idx = np.asarray(indices, dtype=int)
    lam2 = eigenvalues(int(idx.max())) ** 2
    signs = np.array(phase_signs(idx.size))
    return float(np.sum(signs * lam2[idx - 1]))


def phase_bucket(value: float) -> int:
    """Greatest integer <= value."""
    return int(math.floor(value))


@dataclass(frozen=True)
class PhaseQuery:
    indices: tuple[int, ...]
    signs: tuple[int, ...]
    phase: float
    bucket: int


def phase_query(indices) -> PhaseQuery:
    indices = tuple(int(i) for i in indices)
    value = phase(indices)
    return PhaseQuery(
        indices=indices,
        signs=phase_signs(len(indices)),
        phase=value,
        bucket=phase_bucket(value),
    )


def find_pairings(indices, signs) -> list[tuple[int, int]]:
    """Slot pairs (i, j) with equal indices and opposite signs."""
    out = []
    for i in range(len(indices)):
        for j in range(i + 1, len(indices)):
            if indices[i] == indices[j] and signs[i] + signs[j] == 0:
                out.append((i, j))
    return out


def has_pairing(indices, signs=None) -> bool:
    if signs is None:
        signs = phase_signs(len(indices))
    return bool(find_pairings(indices, signs))


def has_simple_pairing(indices, signs=None) -> bool:
    """True if some pairing's value occurs at no third slot (is not over-paired)."""
    if signs is None:
        signs = phase_signs(len(indices))
    counts: dict[int, int] = {}
    for i in indices:
        counts[i] = counts.get(i, 0) + 1
    return any(counts[indices[i]] == 2 for i, _ in find_pairings(indices, signs))


def _normalize_box(box: Box) -> tuple[tuple[int, int], tuple[int, int]]:
    if isinstance(box, (int, np.integer)):
        if box < 1:
            raise ValueError("box side must be >= 1")
        return (1, int(box)), (1, int(box))
    (lo1, hi1), (lo2, hi2) = box
    if lo1 < 1 or lo2 < 1 or hi1 < lo1 or hi2 < lo2:
        raise ValueError(f"invalid index box {box}")
    return (int(lo1), int(hi1)), (int(lo2), int(hi2))


def _box_lam2(box: Box):
    (lo1, hi1), (lo2, hi2) = _normalize_box(box)
    lam2 = eigenvalues(max(hi1, hi2)) ** 2
    n1 = np.arange(lo1, hi1 + 1)
    n2 = np.arange(lo2, hi2 + 1)
    return n1, n2, lam2


def count_diff_pairs(m: float, box: Box, exclude_diagonal: bool = True) -> int:
    """#{(n1, n2) in box : |lam_{n1}^2 - lam_{n2}^2 - m| < 1}, optionally with n1 != n2."""
    n1, n2, lam2 = _box_lam2(box)
    diff = lam2[n1 - 1][:, None] - lam2[n2 - 1][None, :] - m
    mask = np.abs(diff) < 1.0
    if exclude_diagonal:
        mask &= n1[:, None] != n2[None, :]
    return int(mask.sum())


def count_sum_pairs(m: float, box: Box) -> int:
    """#{(n1, n2) in box : |lam_{n1}^2 + lam_{n2}^2 - m| < 1}."""
    n1, n2, lam2 = _box_lam2(box)
    total = lam2[n1 - 1][:, None] + lam2[n2 - 1][None, :] - m
    return int((np.abs(total) < 1.0).sum())


def worst_bucket(box: Box, kind: str = "diff", exclude_diagonal: bool = True) -> tuple[int, int]:
    """Near-worst-case window center m and its pair count, by integer bucketing.

    All pair phases are dropped into unit buckets; the returned m centers the
    length-2 window on the densest adjacent bucket pair, so the count equals
    the occupancy of that pair (a sharp lower bound for the sup over real m).
    """
    n1, n2, lam2 = _box_lam2(box)
    if kind == "diff":
        vals = (lam2[n1 - 1][:, None] - lam2[n2 - 1][None, :])
        if exclude_diagonal:
            vals = vals[n1[:, None] != n2[None, :]]
        else:
            vals = vals.ravel()
    elif kind == "sum":
        vals = (lam2[n1 - 1][:, None] + lam2[n2 - 1][None, :]).ravel()
    else:
        raise ValueError(f"unknown kind {kind!r}")
    buckets = np.floor(vals).astype(np.int64)
    uniq, counts = np.unique(buckets, return_counts=True)
    occupancy = dict(zip(uniq.tolist(), counts.tolist()))
    best_m, best = int(uniq[0]) + 1, -1
    for j, c in occupancy.items():
        pair = c + occupancy.get(j + 1, 0)
        if pair > best:
            best, best_m = pair, j + 1
    count = (
        count_diff_pairs(best_m, box, exclude_diagonal)
        if kind == "diff"
        else count_sum_pairs(best_m, box)
    )
    return best_m, count


def divisor_count(m: int, a0: float, b0: float, M: float, N: float) -> int:
    """#{(a, b) integer : ab = m, |a - a0| <= M, |b - b0| <= N}; requires m != 0."""
    if m == 0:
        raise ValueError("m must be nonzero")
    count = 0
    am = abs(int(m))
    for d in range(1, int(math.isqrt(am)) + 1):
        if am % d:
            continue
        divisors = {d, am // d}
        for q in divisors:
            for a in (q, -q):
                b = m // a
                if abs(a - a0) <= M and abs(b - b0) <= N:
                    count += 1
    return count


def modes_within(bound: float) -> np.ndarray:
    """Mode indices n with lam_n <= bound."""
    if bound < eigenvalues(1)[0]:
        return np.empty(0, dtype=int)
    count = 8
    while eigenvalues(count)[-1] <= bound:
        count *= 2
    lam = eigenvalues(count)
    return np.arange(1, int(np.searchsorted(lam, bound, side="right")) + 1)


Constraint = Optional[Union[str, Callable[[tuple[int, ...]], bool]]]


@dataclass(frozen=True)
class BaseTensorSpec:
    """Indicator tensor of tuples with bucketed phase m inside frequency boxes.

    `input_bounds` holds the 2k+1 frequency bounds of the inputs; `constraint`
    is None, a callable on the full tuple, or one of the named restrictions
    "n-ne-odd-max" (output differs from the largest odd-slot input) and
    "no-simple-pairing".
    """

    N: float
    input_bounds: tuple[float, ...]
    m: int
    constraint: Constraint = None

    def constraint_fn(self) -> Callable[[tuple[int, ...]], bool]:
        if self.constraint is None:
            return lambda idx: True
        if callable(self.constraint):
            return self.constraint
        if self.constraint == "n-ne-odd-max":
            return lambda idx: idx[0] != max(idx[1::2])
        if self.constraint == "no-simple-pairing":
            return lambda idx: not has_simple_pairing(idx)
        raise ValueError(f"unknown constraint {self.constraint!r}")


def base_tensor_entry_count(spec: BaseTensorSpec, ceiling: float = 32.0) -> int:
    """Exact number of indicator-1 entries, by enumeration."""
    bounds = (spec.N, *spec.input_bounds)
    if max(bounds) > ceiling:
        raise ValueError(
            f"frequency bound {max(bounds)} exceeds the brute-force ceiling "
            f"{ceiling}; use a sampled estimate instead"
        )
    sets = [modes_within(b) for b in bounds]
    if any(s.size == 0 for s in sets):
        return 0
    lam2 = eigenvalues(max(int(s[-1]) for s in sets)) ** 2
    signs = phase_signs(len(bounds))
    grids = np.meshgrid(*sets, indexing="ij")
    total = np.zeros(grids[0].shape)
    for g, s in zip(grids, signs):
        total += s * lam2[g - 1]
    mask = np.floor(total).astype(np.int64) == spec.m
    if not mask.any():
        return 0
    fn = spec.constraint_fn()
    tuples = np.stack([g[mask] for g in grids], axis=-1)
    return int(sum(1 for row in tuples if fn(tuple(int(i) for i in row))))


def base_tensor_hs_norm(spec: BaseTensorSpec, ceiling: float = 32.0) -> float:
    """Hilbert-Schmidt norm: sqrt of the number of indicator-1 entries."""
    return math.sqrt(base_tensor_entry_count(spec, ceiling))


def scaling_report(k: int, N: float, basis=None, ceiling: float = 32.0) -> dict:
    """Critical/probabilistic regularity indices and the near-resonant tuple census.

    counting_proxy holds the sup over (output mode, unit phase window) of the
    number of pairing-free input tuples in E_N^{2k+1}, times the largest
    mode-product integral when a basis is supplied, with N^{3k-2} as the
    reference growth.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    report = {
        "k": k,
        "N": N,
        "s_crit": 1.0 - 1.0 / k,
        "s_p": 0.5 - 3.0 / (4.0 * k),
    }
    if N > ceiling:
        raise ValueError(f"N = {N} exceeds the brute-force ceiling {ceiling}")
    modes = modes_within(N)
    proxy: dict = {"reference": float(N) ** (3 * k - 2)}
    if modes.size == 0:
        proxy.update({"count_sup": 0, "c_max": None, "value": None})
        report["counting_proxy"] = proxy
        return report
    lam2 = eigenvalues(int(modes[-1])) ** 2
    signs = phase_signs(2 * k + 2)
    grids = np.meshgrid(*([modes] * (2 * k + 2)), indexing="ij")
    total = np.zeros(grids[0].shape)
    for g, s in zip(grids, signs):
        total += s * lam2[g - 1]
    buckets = np.floor(total).astype(np.int64)
    tuples = np.stack([g.ravel() for g in grids], axis=-1)
    keep = np.array([not has_pairing(tuple(row)) for row in tuples])
    count_sup = 0
    flat_buckets = buckets.ravel()[keep]
    flat_n = tuples[keep, 0]
    for n in modes:
        sub = flat_buckets[flat_n == n]
        if sub.size:
            _, counts = np.unique(sub, return_counts=True)
            count_sup = max(count_sup, int(counts.max()))
    proxy["count_sup"] = count_sup
    if basis is not None:
        if basis.product_order < 2 * k + 2:
            raise ValueError("basis product_order too small for this k")
        kept = tuples[keep]
        c_max = 0.0
        chunk = 8192
        for i0 in range(0, kept.shape[0], chunk):
            block = kept[i0 : i0 + chunk]
            prod = np.ones((block.shape[0], basis.quad.node_count))
            for col in range(block.shape[1]):
                prod *= basis.values[block[:, col] - 1]
            c_max = max(c_max, float(np.max(np.abs(prod @ basis.quad.weights))))
        proxy["c_max"] = c_max
        proxy["value"] = count_sup * c_max
    else:
        proxy["c_max"] = None
        proxy["value"] = None
    report["counting_proxy"] = proxy
    return report
