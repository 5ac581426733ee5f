"""Density matrices and common initial states."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .layout import HilbertLayout, LayoutError, QOperator

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = -1e-7


class InvariantViolation(ValueError):
    """A state failed the trace, Hermiticity or positivity bound."""


@dataclass(frozen=True)
class StateDiagnostics:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float


def diagnose(matrix: np.ndarray) -> StateDiagnostics:
    """Trace error, Hermiticity error and smallest eigenvalue of a matrix."""
    herm = float(np.max(np.abs(matrix - matrix.conj().T)))
    mine = float(np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))[0])
    return StateDiagnostics(abs(np.trace(matrix) - 1.0), herm, mine)


def check_state(matrix: np.ndarray, herm_tol: float = HERMITICITY_TOL) -> StateDiagnostics:
    d = diagnose(matrix)
    if d.trace_error >= TRACE_TOL:
        raise InvariantViolation(f"|Tr rho - 1| = {d.trace_error:.3e}")
    if d.hermiticity_error >= herm_tol:
        raise InvariantViolation(f"||rho - rho^dag||_max = {d.hermiticity_error:.3e}")
    if d.min_eigenvalue <= POSITIVITY_TOL:
        raise InvariantViolation(f"min eigenvalue {d.min_eigenvalue:.3e}")
    return d


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace Hermitian positive operator.

    Validated on construction; use :meth:`from_matrix` to build one from a raw
    array with a layout.
    """

    op: QOperator

    def __post_init__(self):
        check_state(self.op.matrix)

    @classmethod
    def from_matrix(cls, layout: HilbertLayout, matrix: np.ndarray) -> "DensityMatrix":
        return cls(QOperator(layout, matrix))

    @classmethod
    def from_ket(cls, layout: HilbertLayout, ket: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(ket, dtype=complex).ravel()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValueError("zero ket")
        psi = psi / nrm
        return cls.from_matrix(layout, np.outer(psi, psi.conj()))

    @property
    def layout(self) -> HilbertLayout:
        return self.op.layout

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()


def thermal_populations(n_bar: float, dim: int, support: int | None = None) -> np.ndarray:
    """Gibbs weights p_n ∝ (n/(1+n))^n on ``dim`` levels, renormalized.

    ``support`` restricts the distribution to the lowest ``support`` levels
    (the remaining levels are left empty), which gives a finite-support
    initial state with truncation headroom.
    """
    if n_bar < 0:
        raise ValueError("n_bar must be non-negative")
    k = dim if support is None else int(support)
    if not 1 <= k <= dim:
        raise ValueError("support must lie in [1, dim]")
    p = np.zeros(dim)
    if n_bar == 0:
        p[0] = 1.0
        return p
    ratio = n_bar / (1.0 + n_bar)
    p[:k] = ratio ** np.arange(k)
    return p / p.sum()


def thermal_state(layout: HilbertLayout, label: str, n_bar: float,
                  others: Mapping[str, np.ndarray] | None = None,
                  support: int | None = None) -> DensityMatrix:
    """Thermal state on ``label`` tensored with states on the other subsystems.

    Parameters
    ----------
    layout : HilbertLayout
    label : str
        Mode that receives the Gibbs distribution.
    n_bar : float
        Mean occupation before truncation.
    others : mapping, optional
        Local density matrices for the remaining subsystems.  Subsystems not
        listed are put in basis level 0 (vacuum for a mode).
    support : int, optional
        Number of levels carrying Gibbs weight (default: the full cutoff).
    """
    local = {label: np.diag(thermal_populations(n_bar, layout.dim_of(label), support))}
    for lab, rho in (others or {}).items():
        if lab == label:
            raise LayoutError(f"{label!r} given twice")
        local[lab] = rho
    for s in layout.subsystems:
        if s.label not in local:
            local[s.label] = basis_projector(s.dim, 0)
    return DensityMatrix.from_matrix(layout, layout.product(local))


def basis_projector(dim: int, level: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[level, level] = 1.0
    return p


def ket_projector(ket) -> np.ndarray:
    psi = np.asarray(ket, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def product_state(layout: HilbertLayout, locals_: Mapping[str, np.ndarray]) -> DensityMatrix:
    """Product of local density matrices; unspecified subsystems in level 0."""
    filled = {s.label: locals_.get(s.label, basis_projector(s.dim, 0)) for s in layout.subsystems}
    for lab in locals_:
        layout.index(lab)
    return DensityMatrix.from_matrix(layout, layout.product(filled))


def basis_state(layout: HilbertLayout, occupation: Mapping[str, int]) -> DensityMatrix:
    n = layout.total_dim
    m = np.zeros((n, n), dtype=complex)
    i = layout.basis_index(occupation)
    m[i, i] = 1.0
    return DensityMatrix.from_matrix(layout, m)
