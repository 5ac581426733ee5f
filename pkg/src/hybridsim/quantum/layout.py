"""Composite Hilbert-space layouts and operators.

Subsystems are ordered; the composite basis is the Kronecker product in that
order, so an operator acting on subsystem ``k`` is
``I_0 ⊗ ... ⊗ op_k ⊗ ... ⊗ I_{n-1}``.

Spin subsystems use the basis order (|-1>, |0>): index 0 is |-1>, index 1 is
|0>.  With this order sigma_z = diag(+1, -1) and sigma_+ = |-1><0|.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

HERMITIAN_TOL = 1e-12


class LayoutError(ValueError):
    """Raised on unknown labels or mismatched layouts."""


@dataclass(frozen=True)
class Subsystem:
    label: str
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise LayoutError(f"subsystem {self.label!r}: dimension must be a positive integer")


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered list of labelled subsystems.

    Parameters
    ----------
    subsystems : tuple of Subsystem
        Factor spaces in tensor order.

    Examples
    --------
    >>> HilbertLayout.of(spin=2, mech=4, cav=3).total_dim
    24
    """

    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        labels = [s.label for s in self.subsystems]
        if not labels:
            raise LayoutError("layout needs at least one subsystem")
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate subsystem labels in {labels}")

    @classmethod
    def of(cls, **dims: int) -> "HilbertLayout":
        """Build a layout from keyword arguments, preserving their order."""
        return cls(tuple(Subsystem(k, int(v)) for k, v in dims.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def sublayout(self, labels: Iterable[str]) -> "HilbertLayout":
        """Layout restricted to ``labels`` (kept in this layout's order)."""
        wanted = set(labels)
        for lab in wanted:
            self.index(lab)
        return HilbertLayout(tuple(s for s in self.subsystems if s.label in wanted))

    def embed(self, label: str, local: np.ndarray) -> np.ndarray:
        """Tensor a local matrix on ``label`` with identities elsewhere."""
        k = self.index(label)
        local = np.asarray(local, dtype=complex)
        if local.shape != (self.dims[k], self.dims[k]):
            raise LayoutError(f"local operator shape {local.shape} does not fit {label!r} "
                              f"(dim {self.dims[k]})")
        factors = [np.eye(d, dtype=complex) for d in self.dims]
        factors[k] = local
        return reduce(np.kron, factors)

    def product(self, locals_: Mapping[str, np.ndarray]) -> np.ndarray:
        """Kronecker product of per-subsystem matrices; missing labels get identity."""
        for lab in locals_:
            self.index(lab)
        factors = [np.asarray(locals_.get(s.label, np.eye(s.dim)), dtype=complex)
                   for s in self.subsystems]
        return reduce(np.kron, factors)

    def basis_index(self, occupation: Mapping[str, int]) -> int:
        """Composite index of a product basis state; unspecified labels take index 0."""
        idx = 0
        for s in self.subsystems:
            n = int(occupation.get(s.label, 0))
            if not 0 <= n < s.dim:
                raise LayoutError(f"level {n} outside subsystem {s.label!r} (dim {s.dim})")
            idx = idx * s.dim + n
        return idx


@dataclass(frozen=True, eq=False)
class QOperator:
    """Dense complex matrix on a composite space.

    Arithmetic between operators requires identical layouts.  ``hermitian``
    is a promise checked at construction to ``HERMITIAN_TOL``.
    """

    layout: HilbertLayout
    matrix: np.ndarray
    hermitian: bool = field(default=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise LayoutError(f"matrix shape {m.shape} does not match layout dimension {n}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            err = np.max(np.abs(m - m.conj().T)) if n else 0.0
            if err >= HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
                raise ValueError(f"operator flagged Hermitian deviates by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def dag(self) -> "QOperator":
        return QOperator(self.layout, self.matrix.conj().T, self.hermitian)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) < tol)

    def _check(self, other: "QOperator"):
        if not isinstance(other, QOperator):
            return NotImplemented
        if other.layout != self.layout:
            raise LayoutError("operators live on different layouts")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return QOperator(self.layout, self.matrix + other.matrix, self.hermitian and other.hermitian)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return QOperator(self.layout, self.matrix - other.matrix, self.hermitian and other.hermitian)

    def __neg__(self):
        return QOperator(self.layout, -self.matrix, self.hermitian)

    def __mul__(self, scalar):
        if isinstance(scalar, QOperator):
            return NotImplemented
        herm = self.hermitian and np.isreal(scalar)
        return QOperator(self.layout, complex(scalar) * self.matrix, bool(herm))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return QOperator(self.layout, self.matrix @ other.matrix)

    def commutator(self, other: "QOperator") -> "QOperator":
        return self @ other - other @ self

    def __repr__(self):
        return f"QOperator(layout={self.layout.labels}{self.layout.dims}, hermitian={self.hermitian})"


def identity(layout: HilbertLayout) -> QOperator:
    return QOperator(layout, np.eye(layout.total_dim), hermitian=True)


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def destroy(layout: HilbertLayout, label: str) -> QOperator:
    """Truncated annihilation operator on ``label``: <n-1|a|n> = sqrt(n)."""
    return QOperator(layout, layout.embed(label, _ladder(layout.dim_of(label))))


def create(layout: HilbertLayout, label: str) -> QOperator:
    return destroy(layout, label).dag()


def number(layout: HilbertLayout, label: str) -> QOperator:
    n = np.diag(np.arange(layout.dim_of(label), dtype=float))
    return QOperator(layout, layout.embed(label, n), hermitian=True)


def projector(layout: HilbertLayout, label: str, level: int) -> QOperator:
    d = layout.dim_of(label)
    if not 0 <= level < d:
        raise LayoutError(f"level {level} outside subsystem {label!r}")
    p = np.zeros((d, d))
    p[level, level] = 1.0
    return QOperator(layout, layout.embed(label, p), hermitian=True)


# spin basis indices
SPIN_MINUS1 = 0
SPIN_ZERO = 1


@dataclass(frozen=True)
class SpinOperators:
    sz: QOperator
    sp: QOperator
    sm: QOperator


def spin_ops(layout: HilbertLayout, label: str) -> SpinOperators:
    """Two-level operators in the (|-1>, |0>) basis.

    sigma_z = |-1><-1| - |0><0| = diag(1, -1),  sigma_+ = |-1><0|.
    """
    if layout.dim_of(label) != 2:
        raise LayoutError(f"spin subsystem {label!r} must have dimension 2")
    sz = np.diag([1.0, -1.0])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])
    return SpinOperators(
        sz=QOperator(layout, layout.embed(label, sz), hermitian=True),
        sp=QOperator(layout, layout.embed(label, sp)),
        sm=QOperator(layout, layout.embed(label, sp.T)),
    )
