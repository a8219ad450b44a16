"""Catmull-Rom spline basis mapping control nodes to dense trajectories.

A trajectory with ``D`` control dimensions is stored either as a node matrix
``P`` of shape ``(D, K)`` or as a dense matrix ``u`` of shape ``(D, T)``.
The two forms are related by the basis matrix ``phi`` (``K x T``)::

    u = P @ phi
    P = u @ phi_pinv

Nodes are uniformly spaced: node 0 sits on dense sample 0 and node ``K-1``
on dense sample ``T-1``.  The phantom points needed by the first and last
segments are linearly extrapolated (``P[-1] = 2 P[0] - P[1]``), which keeps
endpoint interpolation and exact reproduction of affine node sequences.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ContractError, DomainError, NumericalError

# Uniform Catmull-Rom, tension 1/2.  Rows: control points (i-1, i, i+1, i+2),
# columns: power basis (1, t, t^2, t^3).
CATMULL_ROM = 0.5 * np.array(
    [
        [0.0, -1.0, 2.0, -1.0],
        [2.0, 0.0, -5.0, 3.0],
        [0.0, 1.0, 4.0, -3.0],
        [0.0, 0.0, -1.0, 1.0],
    ]
)


def segment_weights(t):
    """Weights of the four control points bounding a segment at local parameter ``t``."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"segment parameter must lie in [0, 1], got {t}")
    return CATMULL_ROM @ np.array([1.0, t, t * t, t * t * t])


@dataclass(frozen=True)
class BasisPair:
    phi: np.ndarray
    phi_pinv: np.ndarray

    @property
    def n_nodes(self):
        return self.phi.shape[0]

    @property
    def n_dense(self):
        return self.phi.shape[1]

    def node_times(self):
        """Dense-sample position of every node (fractional indices)."""
        K, T = self.phi.shape
        return np.arange(K) * (T - 1) / (K - 1)


def _basis_matrix(K, T):
    phi = np.zeros((K, T))
    # position of each dense sample in node units
    pos = np.arange(T) * (K - 1) / (T - 1)
    seg = np.minimum(np.floor(pos).astype(int), K - 2)
    local = pos - seg
    for s in range(T):
        w = segment_weights(min(max(local[s], 0.0), 1.0))
        i = seg[s]
        for j, idx in enumerate((i - 1, i, i + 1, i + 2)):
            if idx < 0:
                # phantom P[-1] = 2 P[0] - P[1]
                phi[0, s] += 2.0 * w[j]
                phi[1, s] -= w[j]
            elif idx > K - 1:
                # phantom P[K] = 2 P[K-1] - P[K-2]
                phi[K - 1, s] += 2.0 * w[j]
                phi[K - 2, s] -= w[j]
            else:
                phi[idx, s] += w[j]
    return phi


@lru_cache(maxsize=64)
def build_basis(K, T):
    """Basis matrix and its right pseudo-inverse for ``K`` nodes over ``T`` samples.

    Results are cached per ``(K, T)``; the returned arrays are read-only.
    """
    K, T = int(K), int(T)
    if K < 4:
        raise ConfigurationError(f"need at least 4 nodes, got {K}", key="K")
    if T < K:
        raise ConfigurationError(f"dense count {T} is below node count {K}", key="T")
    phi = _basis_matrix(K, T)
    gram = phi @ phi.T
    if np.linalg.cond(gram) > 1e12:
        raise NumericalError(f"basis Gram matrix is rank deficient for K={K}, T={T}")
    phi_pinv = np.linalg.solve(gram, phi).T
    phi.setflags(write=False)
    phi_pinv.setflags(write=False)
    return BasisPair(phi, phi_pinv)


def nodes_to_dense(P, basis):
    P = np.asarray(P, dtype=float)
    if P.shape[-1] != basis.n_nodes:
        raise ContractError(f"node matrix has {P.shape[-1]} columns, basis expects {basis.n_nodes}")
    return P @ basis.phi


def dense_to_nodes(u, basis):
    """Least-squares node fit of a dense trajectory (batched over leading axes)."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != basis.n_dense:
        raise ContractError(f"dense matrix has {u.shape[-1]} columns, basis expects {basis.n_dense}")
    return u @ basis.phi_pinv
