"""
Dense complex linear algebra over labeled tensor-product spaces.

Every state and operator in the simulator lives on a :class:`HilbertLayout`,
an ordered list of ``(label, dim)`` tensor factors.  Basis indices are
mixed-radix with the *last* factor varying fastest, so on the canonical
layout ``[a-slit:2, b-slit:2, env:3]`` the flat index of
``|R_i>|L_j>|e_k>`` is ``6*(i-1) + 3*(j-1) + k``.

Storage is plain row-major ``numpy`` arrays; dimensions never exceed a
dozen or so, so nothing here tries to be clever about sparsity.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import LayoutError, ValidationError

# construction-time guards (hard errors); the tighter 1e-12 invariants are
# reported by DensityOperator.residuals() and asserted in tests
NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-8
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-10

A_SLIT = "a-slit"
B_SLIT = "b-slit"
ENV = "env"


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered tensor factors ``((label, dim), ...)``."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lab), int(dim)) for lab, dim in self.factors)
        if not factors:
            raise LayoutError("a layout needs at least one factor")
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate factor labels in {labels}")
        for lab, dim in factors:
            if dim < 1:
                raise LayoutError(f"factor {lab!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> "HilbertLayout":
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown factor label {label!r}; layout has {self.labels}") from None

    def concat(self, other: "HilbertLayout") -> "HilbertLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LayoutError(f"layout conflict: labels {sorted(clash)} appear on both sides")
        return HilbertLayout(self.factors + other.factors)

    def flat_index(self, digits: Sequence[int]) -> int:
        """Mixed-radix index of a basis tuple, last factor fastest."""
        if len(digits) != len(self.factors):
            raise LayoutError("digit count does not match factor count")
        idx = 0
        for d, dim in zip(digits, self.dims):
            if not 0 <= d < dim:
                raise LayoutError(f"digit {d} out of range for factor of dim {dim}")
            idx = idx * dim + d
        return idx


SYSTEM_LAYOUT = HilbertLayout.of((A_SLIT, 2), (B_SLIT, 2))
ENV_LAYOUT = HilbertLayout.of((ENV, 3))
FULL_LAYOUT = SYSTEM_LAYOUT.concat(ENV_LAYOUT)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a layout."""

    layout: HilbertLayout
    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps).reshape(-1)
        if amps.shape != (self.layout.dim,):
            raise LayoutError(f"expected {self.layout.dim} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("state amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, layout: HilbertLayout, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(layout, amps / norm)

    @classmethod
    def basis(cls, layout: HilbertLayout, *digits: int) -> "StateVector":
        amps = np.zeros(layout.dim, dtype=complex)
        amps[layout.flat_index(digits)] = 1.0
        return cls(layout, amps)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amps.reshape(self.layout.dims)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace operator on a layout.

    Positivity is not checked on construction (it needs an eigensolve);
    call :meth:`validate` when it matters.
    """

    layout: HilbertLayout
    mat: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.mat)
        n = self.layout.dim
        if mat.shape != (n, n):
            raise LayoutError(f"expected a {n}x{n} matrix, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValidationError("density matrix entries must be finite")
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"density matrix is not Hermitian (residual {herm:.3g})")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        object.__setattr__(self, "mat", mat)

    def residuals(self) -> dict[str, float]:
        """Hermiticity residual, trace error and smallest eigenvalue."""
        m = self.mat
        return {
            "hermitian": float(np.max(np.abs(m - m.conj().T))),
            "trace": abs(complex(np.trace(m)) - 1.0),
            "min_eig": float(eig_hermitian(self)[0]),
        }

    def validate(self) -> "DensityOperator":
        lo = eig_hermitian(self)[0]
        if lo < -POSITIVITY_TOL:
            raise ValidationError(f"density matrix is not positive (min eigenvalue {lo:.3g})")
        return self

    def tensor(self) -> np.ndarray:
        """Entries reshaped to ``dims + dims`` (row factors, then column factors)."""
        return self.mat.reshape(self.layout.dims * 2)


Operand = Union[StateVector, DensityOperator]


def kron(x: Operand, y: Operand) -> Operand:
    """Tensor product; the result layout is ``x.layout`` followed by ``y.layout``."""
    layout = x.layout.concat(y.layout)
    if isinstance(x, StateVector) and isinstance(y, StateVector):
        return StateVector(layout, np.kron(x.amps, y.amps))
    if isinstance(x, DensityOperator) and isinstance(y, DensityOperator):
        return DensityOperator(layout, np.kron(x.mat, y.mat))
    raise TypeError("kron needs two states or two density operators")


def dm_from_state(v: StateVector) -> DensityOperator:
    """Projector ``|v><v|``."""
    if abs(v.norm2() - 1.0) > NORM_TOL:
        raise ValidationError("dm_from_state needs a normalized state")
    return DensityOperator(v.layout, np.outer(v.amps, v.amps.conj()))


def mixture(weights: Sequence[float], operators: Sequence[DensityOperator]) -> DensityOperator:
    """Convex combination of operators on a common layout."""
    if len(weights) != len(operators) or not operators:
        raise ValidationError("need one weight per operator")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValidationError(f"mixture weights must be a probability vector, got {weights}")
    layout = operators[0].layout
    mat = np.zeros((layout.dim, layout.dim), dtype=complex)
    for wi, op in zip(w, operators):
        if op.layout != layout:
            raise LayoutError("mixture components live on different layouts")
        mat = mat + wi * op.mat
    return DensityOperator(layout, mat)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Trace out every factor whose label is not in ``keep``.

    Kept factors stay in their original order whatever the order of ``keep``.
    """
    keep = set(keep)
    if not keep:
        raise LayoutError("partial_trace needs at least one factor to keep")
    for label in keep:
        rho.layout.position(label)
    layout = rho.layout
    nf = len(layout.factors)
    if nf > 12:
        raise LayoutError("too many tensor factors for einsum subscripts")
    letters = string.ascii_letters
    rows = list(letters[:nf])
    cols = list(letters[nf:2 * nf])
    out_rows, out_cols, kept = [], [], []
    for pos, (label, dim) in enumerate(layout.factors):
        if label in keep:
            out_rows.append(rows[pos])
            out_cols.append(cols[pos])
            kept.append((label, dim))
        else:
            cols[pos] = rows[pos]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out_rows) + "".join(out_cols)
    reduced = np.einsum(spec, rho.tensor())
    new_layout = HilbertLayout(tuple(kept))
    return DensityOperator(new_layout, reduced.reshape(new_layout.dim, new_layout.dim))


def trace(rho: DensityOperator) -> float:
    tr = complex(np.trace(rho.mat))
    if abs(tr.imag) > 1e-12:
        raise ValidationError(f"trace has imaginary part {tr.imag:.3g}")
    return tr.real


def purity(rho: DensityOperator) -> float:
    """``Tr(rho^2)``; for Hermitian rho this is the squared Frobenius norm."""
    return float(np.sum(np.abs(rho.mat) ** 2))


def jacobi_eigvalsh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary, then applies the real symmetric Jacobi rotation that zeroes it.
    Iterates until the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=complex, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValidationError("jacobi_eigvalsh needs a square matrix")
    a = 0.5 * (a + a.conj().T)
    scale = max(1.0, float(np.linalg.norm(a)))
    threshold = tol * scale
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= threshold * 1e-3:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q of the unitary  diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.diag(a).real)


def eig_hermitian(rho: Union[DensityOperator, np.ndarray]) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of ``rho``."""
    mat = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("eig_hermitian needs a square matrix")
    if mat.shape[0] > 16:
        raise ValidationError("eig_hermitian is limited to dimension 16")
    herm = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"matrix is not Hermitian (residual {herm:.3g})")
    return jacobi_eigvalsh(mat)
