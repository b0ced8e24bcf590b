"""Structured dense matrices.

Every matrix stores its full ``n x n`` array but is built from free
parameters (the strict lower triangle for skew matrices, the lower
triangle with the diagonal for symmetric ones), so symmetry relations hold
bit-exactly rather than up to round-off. Arrays are read-only.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from phsid.core.exceptions import DimensionMismatchError, InvariantError

PSD_TOLERANCE = 1e-10
SPD_RECONSTRUCTION_TOLERANCE = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _numeric(entries, name: str) -> np.ndarray:
    try:
        return np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as e:
        raise DimensionMismatchError(f"{name} is not a numeric array.") from e


def _square(entries, name: str) -> np.ndarray:
    a = _numeric(entries, name)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty square matrix.")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name} has non-finite entries.", code="range")
    return a


def _require_structure(a: np.ndarray, name: str, sign: float, kind: str, code: str):
    mirrored = sign * a.T
    if not np.array_equal(a, mirrored):
        i, j = np.argwhere(a != mirrored)[0]
        raise InvariantError(
            f"{name} is not {kind}: entry ({i},{j}) = {a[i, j]!r} "
            f"but entry ({j},{i}) = {a[j, i]!r}.",
            code=code,
        )


def _stored(a: np.ndarray) -> np.ndarray:
    return _frozen(a) if a.flags.writeable else a


@dataclass(frozen=True, eq=False)
class SkewSymmetricMatrix:
    entries: np.ndarray

    # Let numpy scalars defer to __rmul__ instead of broadcasting.
    __array_ufunc__ = None

    def __post_init__(self):
        a = _square(self.entries, "matrix")
        _require_structure(a, "matrix", -1.0, "skew-symmetric", "skew")
        object.__setattr__(self, "entries", _stored(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_lower(cls, n: int, params) -> "SkewSymmetricMatrix":
        """Build from the n(n-1)/2 strictly-lower-triangular entries, row by row."""
        params = np.asarray(params, dtype=float).ravel()
        rows, cols = np.tril_indices(n, -1)
        if params.size != rows.size:
            raise DimensionMismatchError(
                f"Skew {n}x{n} matrix needs {rows.size} parameters, got {params.size}."
            )
        lower = np.zeros((n, n))
        lower[rows, cols] = params
        return cls(_frozen(lower - lower.T))

    @classmethod
    def from_array(cls, entries, name: str = "matrix") -> "SkewSymmetricMatrix":
        a = _square(entries, name)
        _require_structure(a, name, -1.0, "skew-symmetric", "skew")
        return cls.from_lower(a.shape[0], a[np.tril_indices(a.shape[0], -1)])

    @classmethod
    def skew_part(cls, entries) -> "SkewSymmetricMatrix":
        """The skew part (A - A^T)/2 of an arbitrary square matrix."""
        a = _square(entries, "matrix")
        return cls.from_lower(a.shape[0], ((a - a.T) / 2)[np.tril_indices(len(a), -1)])

    @classmethod
    def zeros(cls, n: int) -> "SkewSymmetricMatrix":
        return cls(_frozen(np.zeros((n, n))))

    def lower(self) -> np.ndarray:
        return self.entries[np.tril_indices(self.n, -1)].copy()

    def __add__(self, other: "SkewSymmetricMatrix") -> "SkewSymmetricMatrix":
        return SkewSymmetricMatrix.from_lower(self.n, self.lower() + other.lower())

    def __sub__(self, other: "SkewSymmetricMatrix") -> "SkewSymmetricMatrix":
        return SkewSymmetricMatrix.from_lower(self.n, self.lower() - other.lower())

    def __mul__(self, alpha: float) -> "SkewSymmetricMatrix":
        return SkewSymmetricMatrix.from_lower(self.n, alpha * self.lower())

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    entries: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        a = _square(self.entries, "matrix")
        _require_structure(a, "matrix", 1.0, "symmetric", "symmetric")
        object.__setattr__(self, "entries", _stored(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_lower(cls, n: int, params) -> "SymmetricMatrix":
        """Build from the n(n+1)/2 lower-triangular entries (diagonal included)."""
        params = np.asarray(params, dtype=float).ravel()
        rows, cols = np.tril_indices(n)
        if params.size != rows.size:
            raise DimensionMismatchError(
                f"Symmetric {n}x{n} matrix needs {rows.size} parameters, "
                f"got {params.size}."
            )
        lower = np.zeros((n, n))
        lower[rows, cols] = params
        return cls(_frozen(lower + np.tril(lower, -1).T))

    @classmethod
    def from_array(cls, entries, name: str = "matrix") -> "SymmetricMatrix":
        a = _square(entries, name)
        _require_structure(a, name, 1.0, "symmetric", "symmetric")
        return cls.from_lower(a.shape[0], a[np.tril_indices(a.shape[0])])

    @classmethod
    def symmetric_part(cls, entries) -> "SymmetricMatrix":
        a = _square(entries, "matrix")
        return cls.from_lower(a.shape[0], ((a + a.T) / 2)[np.tril_indices(len(a))])

    @classmethod
    def diagonal(cls, values) -> "SymmetricMatrix":
        return cls(_frozen(np.diag(np.asarray(values, dtype=float))))

    @classmethod
    def zeros(cls, n: int) -> "SymmetricMatrix":
        return cls(_frozen(np.zeros((n, n))))

    def lower(self) -> np.ndarray:
        return self.entries[np.tril_indices(self.n)].copy()

    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigh(self.entries, eigvals_only=True)[0])

    def is_diagonal(self) -> bool:
        return not np.any(self.entries[~np.eye(self.n, dtype=bool)])

    def __add__(self, other: "SymmetricMatrix") -> "SymmetricMatrix":
        return SymmetricMatrix.from_lower(self.n, self.lower() + other.lower())

    def __sub__(self, other: "SymmetricMatrix") -> "SymmetricMatrix":
        return SymmetricMatrix.from_lower(self.n, self.lower() - other.lower())

    def __mul__(self, alpha: float) -> "SymmetricMatrix":
        return SymmetricMatrix.from_lower(self.n, alpha * self.lower())

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PSDMatrix:
    base: SymmetricMatrix

    def __post_init__(self):
        smallest = self.base.min_eigenvalue()
        if smallest < -PSD_TOLERANCE:
            raise InvariantError(
                f"Matrix is not positive semidefinite: smallest eigenvalue "
                f"{smallest:.3e} < -{PSD_TOLERANCE:g}.",
                code="psd",
            )

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def n(self) -> int:
        return self.base.n

    @classmethod
    def from_array(cls, entries, name: str = "matrix") -> "PSDMatrix":
        base = SymmetricMatrix.from_array(entries, name)
        try:
            return cls(base)
        except InvariantError as e:
            raise InvariantError(f"{name}: {e}", code=e.code) from e


@dataclass(frozen=True, eq=False)
class SPDMatrix:
    base: SymmetricMatrix
    cholesky_factor: np.ndarray

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def n(self) -> int:
        return self.base.n

    @classmethod
    def from_symmetric(cls, base: SymmetricMatrix, name: str = "matrix") -> "SPDMatrix":
        try:
            factor = scipy.linalg.cholesky(base.entries, lower=True)
        except np.linalg.LinAlgError as e:
            raise InvariantError(
                f"{name} is not positive definite (Cholesky failed).", code="spd"
            ) from e

        if not np.all(np.diag(factor) > 0):
            raise InvariantError(
                f"{name} Cholesky factor has a non-positive diagonal.", code="spd"
            )
        error = np.linalg.norm(factor @ factor.T - base.entries)
        if error > SPD_RECONSTRUCTION_TOLERANCE * np.linalg.norm(base.entries):
            raise InvariantError(
                f"{name} Cholesky reconstruction error {error:.3e} is too large.",
                code="spd",
            )
        return cls(base, _frozen(factor))

    @classmethod
    def from_array(cls, entries, name: str = "matrix") -> "SPDMatrix":
        return cls.from_symmetric(SymmetricMatrix.from_array(entries, name), name)

    @classmethod
    def identity(cls, n: int) -> "SPDMatrix":
        return cls(SymmetricMatrix(_frozen(np.eye(n))), _frozen(np.eye(n)))

    def is_identity(self) -> bool:
        return np.array_equal(self.entries, np.eye(self.n))
