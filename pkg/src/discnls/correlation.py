"""Mode-product integrals c(n, n_1, ..., n_m) = int_D e_n e_{n_1} ... e_{n_m} dx.

All basis functions are real and no conjugation enters the integrand, so the
value is invariant under any permutation of the index tuple; entries are
cached under the sorted tuple.  The off-diagonal decay report quantifies how
fast these integrals die off when one index separates from the rest.
"""

from __future__ import annotations

import weakref

import numpy as np

from . import caching
from .basis import SpectralBasis

__all__ = [
    "CorrelationTensor",
    "correlate",
    "verify_offdiagonal_decay",
    "DecayPreconditionError",
]


class DecayPreconditionError(ValueError):
    """The off-diagonal decay estimate does not apply to the given indices."""


class CorrelationTensor:
    """Cache of mode-product integrals for one basis and nonlinearity degree."""

    def __init__(self, basis: SpectralBasis, k: int = 1):
        if k < 0:
            raise ValueError("k must be >= 0")
        self.basis = basis
        self.k = k
        self.entries: dict[tuple[int, ...], float] = {}

    @property
    def quad_node_count(self) -> int:
        return self.basis.quad.node_count

    def correlate(self, indices) -> float:
        key = tuple(sorted(int(i) for i in indices))
        if len(key) < 2:
            raise ValueError("need at least two indices")
        for i in key:
            if not 1 <= i <= self.basis.mode_count:
                raise ValueError(
                    f"mode index {i} outside basis range 1..{self.basis.mode_count}"
                )
        if len(key) > self.basis.product_order:
            raise ValueError(
                f"product of {len(key)} modes exceeds the basis product_order "
                f"{self.basis.product_order}; rebuild the basis"
            )
        cached = self.entries.get(key)
        if cached is not None:
            return cached
        prod = np.prod(self.basis.values[np.array(key) - 1], axis=0)
        value = float(prod @ self.basis.quad.weights)
        self.entries[key] = value
        return value

    _CACHE_KIND = "mode-correlations"

    def save(self, path) -> None:
        keys = sorted(self.entries)
        width = max((len(k) for k in keys), default=0)
        packed = np.zeros((len(keys), width), dtype=np.int64)
        for row, key in enumerate(keys):
            packed[row, : len(key)] = key  # zero-padded: 0 is not a valid mode
        caching.write_blob(
            path,
            self._CACHE_KIND,
            meta={
                "k": self.k,
                "mode_count": self.basis.mode_count,
                "node_count": self.quad_node_count,
            },
            arrays={
                "indices": packed,
                "values": np.array([self.entries[k] for k in keys]),
            },
        )

    @classmethod
    def load(cls, path, basis: SpectralBasis, k: int | None = None) -> "CorrelationTensor":
        expected = {
            "mode_count": basis.mode_count,
            "node_count": basis.quad.node_count,
        }
        if k is not None:
            expected["k"] = k
        meta, arrays = caching.read_blob(path, cls._CACHE_KIND, expected)
        tensor = cls(basis, k=int(meta["k"]))
        for row, value in zip(arrays["indices"], arrays["values"]):
            key = tuple(int(i) for i in row if i > 0)
            tensor.entries[key] = float(value)
        return tensor


_shared: "weakref.WeakKeyDictionary[SpectralBasis, CorrelationTensor]" = (
    weakref.WeakKeyDictionary()
)


def correlate(basis: SpectralBasis, indices) -> float:
    """Cached int_D of the product of the named modes (permutation invariant)."""
    tensor = _shared.get(basis)
    if tensor is None:
        tensor = CorrelationTensor(basis)
        _shared[basis] = tensor
    return tensor.correlate(indices)


def verify_offdiagonal_decay(basis, n, n1, low_indices, eps: float = 0.1) -> dict:
    """Compare |c(n, n1, lows...)| against its high-low decay envelope.

    With m_1 >= m_2 >= ... the sorted lower indices (n1 and low_indices), the
    envelope is m_2 * m_3^eps / |n - m_1| * prod_{j>=4} m_j^{1/2}, valid when
    |n - m_1| >= m_2 >= 2.  Returns {"lhs", "bound_rhs", "ratio"}.
    """
    lower = sorted((int(n1), *(int(i) for i in low_indices)), reverse=True)
    if len(lower) < 2:
        raise ValueError("need n1 plus at least one low index")
    m1, m2 = lower[0], lower[1]
    if m2 < 2:
        raise DecayPreconditionError(
            f"second-largest lower index {m2} < 2; the estimate needs m_2 >> 1"
        )
    if abs(n - m1) < m2:
        raise DecayPreconditionError(
            f"|n - m_1| = {abs(n - m1)} < m_2 = {m2}; not a high-low separated tuple"
        )
    lhs = abs(correlate(basis, (n, n1, *low_indices)))
    m3 = lower[2] if len(lower) >= 3 else 1
    tail = float(np.prod([float(m) ** 0.5 for m in lower[3:]]))
    bound = m2 * (m3 ** eps) / abs(n - m1) * tail
    return {"lhs": lhs, "bound_rhs": bound, "ratio": lhs / bound}
