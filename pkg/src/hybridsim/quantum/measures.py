"""Expectation values, partial traces and state distances."""
from __future__ import annotations

import string

import numpy as np

from .layout import LayoutError, QOperator
from .states import DensityMatrix


def _require_same(a, b):
    if a.layout != b.layout:
        raise LayoutError("layout mismatch")


def expectation(rho: DensityMatrix, op: QOperator):
    """Tr(rho A).  Returns a float for Hermitian-flagged ``op``, else complex."""
    _require_same(rho.op, op)
    # Tr(rho A) = sum_ij rho_ij A_ji
    val = np.sum(rho.matrix * op.matrix.T)
    return float(val.real) if op.hermitian else complex(val)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the subsystems named in ``keep``.

    The kept subsystems stay in the parent layout's order.
    """
    if isinstance(keep, str):
        keep = [keep]
    layout = rho.layout
    sub = layout.sublayout(keep)
    dims = layout.dims
    n = len(dims)
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    kept = [layout.index(lab) for lab in sub.labels]
    for k in range(n):
        if k not in kept:
            col[k] = row[k]
    spec = "".join(row) + "".join(col) + "->" + "".join(row[k] for k in kept) + "".join(col[k] for k in kept)
    t = np.einsum(spec, rho.matrix.reshape(dims + dims))
    d = sub.total_dim
    return DensityMatrix.from_matrix(sub, t.reshape(d, d))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clipped to [0, 1]."""
    _require_same(rho, sigma)
    s = _psd_sqrt(rho.matrix)
    inner = s @ sigma.matrix @ s
    ev = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.clip(np.sum(np.sqrt(ev)) ** 2, 0.0, 1.0))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1."""
    _require_same(rho, sigma)
    diff = rho.matrix - sigma.matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
