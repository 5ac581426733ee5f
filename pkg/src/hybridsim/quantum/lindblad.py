"""Lindblad master-equation models, propagation and steady states.

The equation integrated is::

    d rho/dt = -i [H(t), rho] + sum_k r_k ( c_k rho c_k^dag - 1/2 {c_k^dag c_k, rho} )

with hbar = 1, H in rad/s and t in seconds.  H(t) is a static part plus a
sum of operators multiplied by scalar coefficient functions of time.

Vectorization follows numpy's row-major ``ravel``: vec(A rho B) =
(A ⊗ B^T) vec(rho).
"""
from __future__ import annotations

import logging
import time as _time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .layout import HilbertLayout, LayoutError, QOperator
from .states import DensityMatrix, InvariantViolation, StateDiagnostics, check_state, diagnose

log = logging.getLogger(__name__)

RTOL = 1e-8
ATOL = 1e-10
RENORM_THRESHOLD = 1e-10
# evolution invariant bounds at output times
EVOLVE_HERM_TOL = 1e-9
# beyond this dimension the right-hand side switches to CSR matrices
SPARSE_DIM = 64
EXPM_DIM = 40


class IntegrationError(RuntimeError):
    """The adaptive integrator failed (typically step-size underflow)."""


class DegenerateSteadyState(RuntimeError):
    """The Liouvillian has more than one stationary state."""


@dataclass(frozen=True)
class CollapseTerm:
    operator: QOperator
    rate: float


@dataclass(frozen=True)
class DriveTerm:
    """Hamiltonian contribution ``coefficient(t) * operator``.

    The caller is responsible for the total Hamiltonian being Hermitian,
    e.g. by pairing ``f(t) A`` with ``conj(f(t)) A^dag``.
    """

    operator: QOperator
    coefficient: Callable[[float], complex]


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus collapse channels on one layout.

    Parameters
    ----------
    layout : HilbertLayout
    hamiltonian : QOperator, optional
        Time-independent part (rad/s).  ``None`` means zero.
    drive_terms : sequence of DriveTerm
        Time-dependent Hamiltonian pieces.
    collapse_terms : sequence of CollapseTerm
        Jump operators with non-negative rates (1/s).
    """

    layout: HilbertLayout
    hamiltonian: QOperator | None = None
    drive_terms: tuple = ()
    collapse_terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "drive_terms", tuple(self.drive_terms))
        object.__setattr__(self, "collapse_terms", tuple(self.collapse_terms))
        ops = [t.operator for t in self.drive_terms] + [c.operator for c in self.collapse_terms]
        if self.hamiltonian is not None:
            ops.append(self.hamiltonian)
        for op in ops:
            if op.layout != self.layout:
                raise LayoutError("all model operators must share the model layout")
        for c in self.collapse_terms:
            if not (c.rate >= 0 and np.isfinite(c.rate)):
                raise ValueError(f"collapse rate must be finite and non-negative, got {c.rate}")
        h0 = self.hamiltonian_at(0.0).matrix
        scale = max(1.0, float(np.max(np.abs(h0))) if h0.size else 1.0)
        if np.max(np.abs(h0 - h0.conj().T)) > 1e-12 * scale:
            raise ValueError("Hamiltonian is not Hermitian")

    @property
    def autonomous(self) -> bool:
        return not self.drive_terms

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def hamiltonian_at(self, t: float) -> QOperator:
        m = np.zeros((self.dim, self.dim), dtype=complex)
        if self.hamiltonian is not None:
            m += self.hamiltonian.matrix
        for term in self.drive_terms:
            m += complex(term.coefficient(t)) * term.operator.matrix
        return QOperator(self.layout, m)

    def with_collapse(self, extra: Sequence[CollapseTerm]) -> "LindbladModel":
        return LindbladModel(self.layout, self.hamiltonian, self.drive_terms,
                             self.collapse_terms + tuple(extra))

    def without_dissipation(self) -> "LindbladModel":
        return LindbladModel(self.layout, self.hamiltonian, self.drive_terms, ())


@dataclass(frozen=True)
class TimeSeries:
    """Named real observables sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: Mapping[str, np.ndarray]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or (t.size > 1 and np.any(np.diff(t) <= 0)):
            raise ValueError("times must be a strictly increasing 1-D array")
        vals = {}
        for k, v in self.values.items():
            a = np.asarray(v, dtype=float)
            if a.shape != t.shape:
                raise ValueError(f"observable {k!r} has {a.shape} samples for {t.shape} times")
            vals[k] = a
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __len__(self):
        return self.times.size

    @property
    def names(self) -> list[str]:
        return list(self.values)

    def records(self) -> list[dict]:
        return [{"t": float(t), **{k: float(v[i]) for k, v in self.values.items()}}
                for i, t in enumerate(self.times)]


@dataclass
class EvolutionResult:
    series: TimeSeries
    final_state: DensityMatrix
    states: list | None
    max_trace_error: float
    max_hermiticity_error: float
    min_eigenvalue: float
    nfev: int
    renormalizations: int
    wall_time: float


@dataclass(frozen=True)
class _Generator:
    """Precomputed matrices for the right-hand side."""

    dim: int
    sparse: bool
    k_static: object  # H0 - (i/2) sum r c^dag c
    drive_ops: tuple
    drive_coeffs: tuple
    jumps: object  # superoperator (sparse) or list of (sqrt(r) c) dense

    def rhs(self, t, y):
        n = self.dim
        # -iK rho + i(K rho)^dag is the generator only for Hermitian rho; on the
        # rounding-level anti-Hermitian part it would act as -i(KA + AK^dag),
        # which amplifies it.  Acting on the Hermitian part keeps that residue
        # frozen at rounding level.
        rho = y.reshape(n, n)
        rho = 0.5 * (rho + rho.conj().T)
        if self.drive_ops:
            k = self.k_static
            for op, f in zip(self.drive_ops, self.drive_coeffs):
                k = k + complex(f(t)) * op
            x = k @ rho
        else:
            x = self.k_static @ rho
        if self.sparse:
            out = (self.jumps @ rho.ravel()).reshape(n, n)
        else:
            out = np.zeros((n, n), dtype=complex)
            for c in self.jumps:
                out += c @ rho @ c.conj().T
        out += -1j * x
        out += 1j * x.conj().T
        return out.ravel()


def _generator(model: LindbladModel, sparse: bool | None) -> _Generator:
    n = model.dim
    use_sparse = (n > SPARSE_DIM) if sparse is None else bool(sparse)
    h0 = model.hamiltonian.matrix if model.hamiltonian is not None else np.zeros((n, n))
    k = np.array(h0, dtype=complex)
    for c in model.collapse_terms:
        k -= 0.5j * c.rate * (c.operator.matrix.conj().T @ c.operator.matrix)
    if use_sparse:
        k_s = sp.csr_matrix(k)
        drive = tuple(sp.csr_matrix(t.operator.matrix) for t in model.drive_terms)
        j = sp.csr_matrix((n * n, n * n), dtype=complex)
        for c in model.collapse_terms:
            if c.rate == 0:
                continue
            cs = sp.csr_matrix(c.operator.matrix)
            j = j + c.rate * sp.kron(cs, cs.conj(), format="csr")
        return _Generator(n, True, k_s, drive, tuple(t.coefficient for t in model.drive_terms), j.tocsr())
    jumps = tuple(np.sqrt(c.rate) * c.operator.matrix for c in model.collapse_terms if c.rate > 0)
    drive = tuple(np.array(t.operator.matrix) for t in model.drive_terms)
    return _Generator(n, False, k, drive, tuple(t.coefficient for t in model.drive_terms), jumps)


Observable = Union[QOperator, Callable[[np.ndarray], float]]


@dataclass
class RunRecord:
    dim: int
    n_outputs: int
    max_trace_error: float
    max_hermiticity_error: float
    min_eigenvalue: float
    checked: bool


@dataclass
class RunLog:
    """Invariant diagnostics of every :func:`evolve` call made while active."""

    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def worst(self) -> StateDiagnostics:
        if not self.records:
            return StateDiagnostics(0.0, 0.0, np.inf)
        return StateDiagnostics(max(r.max_trace_error for r in self.records),
                                max(r.max_hermiticity_error for r in self.records),
                                min(r.min_eigenvalue for r in self.records))


_ACTIVE_LOGS: list[RunLog] = []


@contextmanager
def recording():
    """Collect a :class:`RunRecord` for each evolution inside the block."""
    rl = RunLog()
    _ACTIVE_LOGS.append(rl)
    try:
        yield rl
    finally:
        _ACTIVE_LOGS.remove(rl)


def _measure(obs: Mapping[str, Observable], rho: np.ndarray) -> dict:
    out = {}
    for name, o in obs.items():
        if isinstance(o, QOperator):
            out[name] = float(np.real(np.sum(rho * o.matrix.T)))
        else:
            out[name] = float(o(rho))
    return out


def evolve(model: LindbladModel, rho0: DensityMatrix, times: Sequence[float],
           observables: Mapping[str, Observable] | None = None, *,
           store_states: bool = False, rtol: float = RTOL, atol: float = ATOL,
           sparse: bool | None = None, check_invariants: bool = True,
           max_step: float = np.inf, method: str = "rk45") -> EvolutionResult:
    """Integrate the master equation from ``times[0]`` and sample at ``times``.

    Parameters
    ----------
    model : LindbladModel
    rho0 : DensityMatrix
        State at ``times[0]``.
    times : array_like
        Strictly increasing output times (s).
    observables : mapping, optional
        ``name -> QOperator`` (real part of Tr(rho A) is recorded) or
        ``name -> callable(matrix) -> float``.
    store_states : bool
        Keep a :class:`DensityMatrix` per output time.
    sparse : bool, optional
        Force the CSR (True) or dense (False) right-hand side.  By default CSR
        is used above ``SPARSE_DIM``.
    check_invariants : bool
        Validate trace, Hermiticity and positivity at every output time and
        raise :class:`InvariantViolation` on failure.
    method : {"rk45", "expm"}
        ``"expm"`` propagates an autonomous model with exact step propagators
        exp(L dt), one per distinct output spacing.  It builds the dense
        Liouvillian and is limited to ``EXPM_DIM``.

    Returns
    -------
    EvolutionResult
        Sampled observables, final state and invariant diagnostics.

    Notes
    -----
    Dormand-Prince 5(4) from :func:`scipy.integrate.solve_ivp` by default.  The update
    is linear with traceless increments, so the trace is conserved up to
    rounding; output states drifting by more than ``RENORM_THRESHOLD`` are
    renormalized and counted.
    """
    if rho0.layout != model.layout:
        raise LayoutError("initial state and model live on different layouts")
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    obs = dict(observables or {})
    gen = _generator(model, sparse)
    start = _time.perf_counter()
    y0 = np.array(rho0.matrix, dtype=complex).ravel()
    if method == "expm":
        ys = _expm_outputs(model, y0, t)
        nfev = 0
    elif method != "rk45":
        raise ValueError(f"unknown method {method!r}")
    elif t.size == 1:
        ys = y0[:, None]
        nfev = 0
    else:
        sol = solve_ivp(gen.rhs, (t[0], t[-1]), y0, method="RK45", t_eval=t,
                        rtol=rtol, atol=atol, max_step=max_step)
        if sol.status != 0:
            raise IntegrationError(f"integration failed at t={sol.t[-1] if sol.t.size else t[0]}: "
                                   f"{sol.message}")
        ys = sol.y
        nfev = sol.nfev
    n = model.dim
    rows = {k: np.empty(t.size) for k in obs}
    states = [] if store_states else None
    worst = StateDiagnostics(0.0, 0.0, np.inf)
    renorm = 0
    rho = None
    for i in range(t.size):
        rho = ys[:, i].reshape(n, n)
        tr = np.trace(rho).real
        if abs(tr - 1.0) > RENORM_THRESHOLD:
            rho = rho / tr
            renorm += 1
        if check_invariants or store_states or i == t.size - 1:
            d = diagnose(rho)
            worst = StateDiagnostics(max(worst.trace_error, d.trace_error),
                                     max(worst.hermiticity_error, d.hermiticity_error),
                                     min(worst.min_eigenvalue, d.min_eigenvalue))
            if check_invariants:
                try:
                    check_state(rho, herm_tol=EVOLVE_HERM_TOL)
                except InvariantViolation as exc:
                    raise InvariantViolation(f"at t={t[i]:.6g}: {exc}") from None
        for k, v in _measure(obs, rho).items():
            rows[k][i] = v
        if store_states:
            states.append(_as_state(model.layout, rho))
    final = _as_state(model.layout, rho)
    for rl in _ACTIVE_LOGS:
        rl.records.append(RunRecord(n, t.size, worst.trace_error, worst.hermiticity_error,
                                    worst.min_eigenvalue, check_invariants))
    return EvolutionResult(TimeSeries(t, rows), final, states, worst.trace_error,
                           worst.hermiticity_error, worst.min_eigenvalue, nfev, renorm,
                           _time.perf_counter() - start)


def _expm_outputs(model: LindbladModel, y0: np.ndarray, t: np.ndarray) -> np.ndarray:
    if not model.autonomous:
        raise ValueError("expm propagation needs a time-independent model")
    if model.dim > EXPM_DIM:
        raise ValueError(f"expm propagation limited to dim <= {EXPM_DIM}")
    lv = liouvillian(model)
    ys = np.empty((y0.size, t.size), dtype=complex)
    ys[:, 0] = y0
    steps: list[tuple[float, np.ndarray]] = []
    for i in range(1, t.size):
        dt = t[i] - t[i - 1]
        # linspace spacings differ only in the last bits; share their propagator
        prop = next((u for d, u in steps if abs(d - dt) <= 1e-12 * dt), None)
        if prop is None:
            prop = sla.expm(lv * dt)
            steps.append((dt, prop))
        ys[:, i] = prop @ ys[:, i - 1]
    return ys


def _as_state(layout: HilbertLayout, rho: np.ndarray) -> DensityMatrix:
    # symmetrize the rounding-level anti-Hermitian part before validation
    return DensityMatrix.from_matrix(layout, 0.5 * (rho + rho.conj().T))


def liouvillian(model: LindbladModel, t: float = 0.0, sparse: bool = False):
    """Superoperator L with vec(d rho/dt) = L vec(rho) (row-major vec)."""
    n = model.dim
    eye = sp.identity(n, dtype=complex, format="csr")
    h = sp.csr_matrix(model.hamiltonian_at(t).matrix)
    lv = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for c in model.collapse_terms:
        if c.rate == 0:
            continue
        cm = sp.csr_matrix(c.operator.matrix)
        cdc = (cm.conj().T @ cm).tocsr()
        lv = lv + c.rate * (sp.kron(cm, cm.conj()) - 0.5 * sp.kron(cdc, eye) - 0.5 * sp.kron(eye, cdc.T))
    lv = lv.tocsc()
    return lv if sparse else lv.toarray()


@dataclass
class SteadyStateResult:
    state: DensityMatrix
    residual: float  # ||L rho||_max
    scale: float  # max |L_ij|
    method: str


def steady_state(model: LindbladModel, method: str = "auto", tol: float = 1e-10,
                 dense_limit: int = 40, integrate_chunk: float | None = None) -> SteadyStateResult:
    """Stationary state of an autonomous model.

    Parameters
    ----------
    method : {"auto", "svd", "direct", "integrate"}
        ``svd`` takes the null vector of the dense Liouvillian and detects a
        degenerate null space; ``direct`` replaces one row of the sparse
        Liouvillian by the trace condition and LU-solves; ``integrate``
        propagates until ||d rho/dt||_max/scale < ``tol``.  ``auto`` picks
        ``svd`` up to ``dense_limit`` and ``direct`` above.
    tol : float
        Residual bound relative to the largest Liouvillian entry.
    """
    if not model.autonomous:
        raise ValueError("steady_state needs a time-independent model")
    n = model.dim
    if method == "auto":
        method = "svd" if n <= dense_limit else "direct"
    lv = liouvillian(model, sparse=True)
    scale = max(1.0, float(np.max(np.abs(lv.data)))) if lv.nnz else 1.0
    if method == "svd":
        _, s, vh = sla.svd(lv.toarray())
        null_tol = 1e-9 * s[0] if s[0] > 0 else 1e-300
        n_null = int(np.sum(s < null_tol))
        if n_null > 1:
            raise DegenerateSteadyState(f"{n_null} stationary states (singular values {s[-n_null:]})")
        vec = vh[-1].conj()
    elif method == "direct":
        # replace the first equation by the trace condition sum_i rho_ii = 1
        keep = np.ones(n * n)
        keep[0] = 0.0
        trace_row = sp.csr_matrix((np.ones(n), (np.zeros(n, dtype=int), np.arange(n) * (n + 1))),
                                  shape=(n * n, n * n))
        a = sp.diags(keep) @ lv + trace_row
        b = np.zeros(n * n, dtype=complex)
        b[0] = 1.0
        try:
            vec = spla.splu(a.tocsc()).solve(b)
        except RuntimeError as exc:
            raise DegenerateSteadyState(f"singular Liouvillian: {exc}") from None
    elif method == "integrate":
        return _steady_by_integration(model, lv, scale, tol, integrate_chunk)
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = vec.reshape(n, n)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    resid = float(np.max(np.abs(lv @ rho.ravel())))
    if resid > tol * scale:
        raise DegenerateSteadyState(f"steady-state residual {resid:.3e} exceeds {tol * scale:.3e}; "
                                    "null space ill-conditioned or degenerate")
    return SteadyStateResult(_as_state(model.layout, rho), resid, scale, method)


def _steady_by_integration(model, lv, scale, tol, chunk):
    n = model.dim
    if chunk is None:
        rates = [c.rate for c in model.collapse_terms if c.rate > 0]
        if not rates:
            raise DegenerateSteadyState("no dissipation: integration cannot converge")
        chunk = 10.0 / min(rates)
    rho = DensityMatrix.from_matrix(model.layout, np.eye(n) / n)
    t0 = 0.0
    for _ in range(200):
        res = evolve(model, rho, [t0, t0 + chunk], check_invariants=False)
        rho = res.final_state
        t0 += chunk
        resid = float(np.max(np.abs(lv @ rho.matrix.ravel())))
        if resid < tol * scale:
            return SteadyStateResult(rho, resid, scale, "integrate")
    raise IntegrationError("steady state not reached by long-time integration")


def propagate_expm(model: LindbladModel, rho0: DensityMatrix, times: Sequence[float]) -> list[np.ndarray]:
    """Reference propagation by dense matrix exponentials of the Liouvillian.

    Only valid for autonomous models; intended for small dimensions.
    """
    if not model.autonomous:
        raise ValueError("matrix-exponential propagation needs a time-independent model")
    lv = liouvillian(model)
    t = np.asarray(times, dtype=float)
    n = model.dim
    y0 = rho0.matrix.ravel()
    return [(sla.expm(lv * (ti - t[0])) @ y0).reshape(n, n) for ti in t]
