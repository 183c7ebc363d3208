import numpy as np
from scipy.sparse.csgraph import connected_components

from ..errors import DomainError


def _closed_classes_dense(P: np.ndarray) -> int:
    # transitive closure by repeated squaring; fine for small chains
    R = (P > 0) | np.eye(P.shape[0], dtype=bool)
    while True:
        nxt = (R.astype(np.int64) @ R.astype(np.int64)) > 0
        if (nxt == R).all():
            break
        R = nxt
    closed = (R <= R.T).all(axis=1)  # everything reachable from i reaches back
    return len({R[i].tobytes() for i in np.nonzero(closed)[0]})


def closed_classes(P: np.ndarray) -> int:
    """Number of closed communicating classes of a transition matrix."""
    if P.shape[0] <= 64:
        return _closed_classes_dense(P)
    n_comp, labels = connected_components(P > 0, directed=True, connection="strong")
    leaves = np.ones(n_comp, dtype=bool)
    src, dst = np.nonzero(P > 0)
    leaves[labels[src][labels[src] != labels[dst]]] = False
    return int(leaves.sum())


def steady_state(P, tol: float = 1e-12) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix with a single closed class.

    Solves (P^T - I) pi = 0 with the last balance equation replaced by
    sum(pi) = 1.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DomainError("transition matrix must be square")
    if (P < 0).any() or np.abs(P.sum(axis=1) - 1).max() > 1e-12:
        raise DomainError("transition matrix rows must be nonnegative and sum to 1")
    if closed_classes(P) != 1:
        raise DomainError("chain has more than one closed class; stationary distribution is not unique")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    resid = np.abs(pi @ P - pi).max()
    if resid > tol * max(1, n):
        raise DomainError(f"stationary solve residual {resid:.3g} exceeds tolerance")
    return pi
