"""Dense complex linear algebra for small two-player quantum games.

States, operators and density matrices are thin immutable wrappers around
``complex128`` numpy arrays (a pair of float64 per entry). Every constructor
validates its invariant, so a value that exists is a valid value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, ValidationError

TOL_NORM = 1e-12
TOL_UNIT = 1e-10
MAX_DIM = 256


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def _check_dim(dim: int, what: str) -> None:
    if dim < 1:
        raise ValidationError(what, f"dimension must be positive, got {dim}")
    if dim > MAX_DIM:
        raise ValidationError(what, f"dimension {dim} exceeds maximum {MAX_DIM}")


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValidationError(what, "contains NaN or infinite entries")


def bitstring_labels(n_bits: int) -> list[str]:
    """Big-endian bit labels: ``"xy"`` is index ``2*x + y``."""
    if n_bits == 0:
        return [""]
    return [format(i, f"0{n_bits}b") for i in range(2**n_bits)]


def product_labels(dim_a: int, dim_b: int) -> list[str]:
    """Labels for the joint basis of ``H_A (x) H_B``, index ``a*dim_b + b``."""
    bits_a, bits_b = _log2(dim_a), _log2(dim_b)
    if bits_a is not None and bits_b is not None:
        return bitstring_labels(bits_a + bits_b)
    return [f"{a}{b}" if max(dim_a, dim_b) <= 10 else f"{a},{b}"
            for a in range(dim_a) for b in range(dim_b)]


def _log2(n: int) -> int | None:
    if n >= 1 and n & (n - 1) == 0:
        return n.bit_length() - 1
    return None


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state, amplitudes indexed by basis label order."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValidationError("state", f"expected a vector, got shape {amps.shape}")
        _check_dim(amps.shape[0], "state")
        _check_finite(amps, "state")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > TOL_NORM:
            raise ValidationError("state", f"not normalized: sum |amp|^2 = {norm2!r}")
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @classmethod
    def basis(cls, index: int, dim: int) -> StateVector:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def normalized(cls, amps: Sequence[complex] | np.ndarray) -> StateVector:
        """Build a state after rescaling ``amps`` to unit norm."""
        arr = np.asarray(amps, dtype=np.complex128)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValidationError("state", "zero vector cannot be normalized")
        return cls(arr / norm)

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: StateVector) -> float:
        """``|<self|other>|``; 1 means equal up to global phase."""
        return abs(self.overlap(other))

    def same_ray(self, other: StateVector, tol: float = TOL_UNIT) -> bool:
        return self.dim == other.dim and abs(self.fidelity(other) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    entries: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.entries, dtype=np.complex128)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError("operator", f"expected a square matrix, got shape {u.shape}")
        _check_dim(u.shape[0], "operator")
        _check_finite(u, "operator")
        dev = unitarity_deviation(u)
        if dev > TOL_UNIT:
            raise ValidationError("operator", f"not unitary: max |U^dag U - I| = {dev:.3e}")
        object.__setattr__(self, "entries", _frozen(u))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> UnitaryOperator:
        return cls(np.eye(dim))

    def dagger(self) -> UnitaryOperator:
        return UnitaryOperator(self.entries.conj().T)

    def __matmul__(self, other: UnitaryOperator) -> UnitaryOperator:
        if not isinstance(other, UnitaryOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValidationError("operator", f"cannot compose dims {self.dim} and {other.dim}")
        return UnitaryOperator(self.entries @ other.entries)

    def allclose(self, other: UnitaryOperator, tol: float = TOL_UNIT) -> bool:
        return self.dim == other.dim and float(np.max(np.abs(self.entries - other.entries))) <= tol


def unitarity_deviation(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.complex128)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.entries, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValidationError("density", f"expected a square matrix, got shape {rho.shape}")
        _check_dim(rho.shape[0], "density")
        _check_finite(rho, "density")
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if herm > TOL_UNIT:
            raise ValidationError("density", f"not Hermitian: max deviation {herm:.3e}")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > TOL_NORM:
            raise ValidationError("density", f"trace {tr!r} is not 1")
        diag = np.diag(rho)
        if np.any(diag.real < -TOL_NORM):
            raise ValidationError("density", "negative diagonal entry")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim) / dim)

    def evolve(self, u: UnitaryOperator) -> DensityMatrix:
        """``U rho U^dag``."""
        if u.dim != self.dim:
            raise ValidationError("operator", f"dim {u.dim} does not match density dim {self.dim}")
        m = u.entries
        out = m @ self.entries @ m.conj().T
        # restore exact hermiticity lost to rounding
        return DensityMatrix((out + out.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Projective measurement with eigenstates ``|m_i> = basis_change |i>``."""

    labels: tuple[str, ...]
    basis_change: UnitaryOperator | None = None

    def __post_init__(self) -> None:
        labels = tuple(str(lbl) for lbl in self.labels)
        _check_dim(len(labels), "measurement")
        if len(set(labels)) != len(labels):
            raise ValidationError("measurement.labels", "labels must be pairwise distinct")
        if self.basis_change is not None and self.basis_change.dim != len(labels):
            raise ValidationError(
                "measurement.basis_change",
                f"dim {self.basis_change.dim} does not match {len(labels)} labels",
            )
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @classmethod
    def computational(cls, dim_a: int, dim_b: int) -> MeasurementBasis:
        return cls(tuple(product_labels(dim_a, dim_b)))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError("measurement.labels", f"unknown basis label {label!r}") from None

    def eigenstate(self, label: str) -> np.ndarray:
        i = self.index(label)
        if self.basis_change is None:
            vec = np.zeros(self.dim, dtype=np.complex128)
            vec[i] = 1.0
            return vec
        return self.basis_change.entries[:, i].copy()


def tensor(u: UnitaryOperator, v: UnitaryOperator) -> UnitaryOperator:
    dim = u.dim * v.dim
    if dim > MAX_DIM:
        raise ValidationError("operator", f"tensor product dimension {dim} exceeds maximum {MAX_DIM}")
    return UnitaryOperator(np.kron(u.entries, v.entries))


def apply(u: UnitaryOperator, psi: StateVector) -> StateVector:
    if u.dim != psi.dim:
        raise ValidationError("operator", f"dim {u.dim} does not match state dim {psi.dim}")
    return StateVector(u.entries @ psi.amps)


def _clamp_probs(p: np.ndarray) -> np.ndarray:
    if np.any(p < -TOL_NORM) or np.any(p > 1 + TOL_NORM):
        raise InvariantViolation(f"probability outside [0, 1] beyond tolerance: {p.tolist()}")
    total = float(p.sum())
    if abs(total - 1.0) > TOL_NORM:
        raise InvariantViolation(f"probabilities sum to {total!r}")
    return np.clip(p, 0.0, 1.0)


def measure_probs(psi: StateVector, basis: MeasurementBasis) -> np.ndarray:
    """Born probabilities ``|<m_i|psi>|^2`` in label order."""
    if psi.dim != basis.dim:
        raise ValidationError("measurement", f"basis dim {basis.dim} does not match state dim {psi.dim}")
    amps = psi.amps
    if basis.basis_change is not None:
        amps = basis.basis_change.entries.conj().T @ amps
    return _clamp_probs(np.abs(amps) ** 2)


def density_from_pure(psi: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(psi.amps, psi.amps.conj()))


def measure_probs_mixed(rho: DensityMatrix, basis: MeasurementBasis) -> np.ndarray:
    """``<m_i|rho|m_i>`` in label order."""
    if rho.dim != basis.dim:
        raise ValidationError("measurement", f"basis dim {basis.dim} does not match density dim {rho.dim}")
    r = rho.entries
    if basis.basis_change is not None:
        b = basis.basis_change.entries
        r = b.conj().T @ r @ b
    return _clamp_probs(np.diag(r).real.copy())


def random_unitary(dim: int, rng: np.random.Generator) -> UnitaryOperator:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return UnitaryOperator(q * (d / np.abs(d)))


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.normalized(z)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": PAULI_X,
    "F": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "H": HADAMARD,
}
