"""Dense complex linear algebra for small matrix orders.

All matrices in this package are square numpy arrays of dtype complex128.
The norm used everywhere is the Frobenius norm, which is self-adjoint
(invariant under conjugate transposition); every series criterion in the
package is stated in terms of it.
"""

from __future__ import annotations

import numpy as np

COND_LIMIT = 1e14


class SingularMatrixError(ValueError):
    """Matrix is numerically singular (condition estimate above COND_LIMIT)."""


class ShapeMismatchError(ValueError):
    """Operands have incompatible orders or lengths."""


def as_matrix(entries, n: int | None = None) -> np.ndarray:
    """Validate and freeze a square complex matrix.

    Accepts anything ``np.asarray`` does. Entries must be finite. When ``n``
    is given the order is checked against it. The returned array is
    read-only so shared values cannot be mutated downstream.
    """
    m = np.asarray(entries, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ShapeMismatchError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")
    if n is not None and m.shape[0] != n:
        raise ShapeMismatchError(f"expected order {n}, got {m.shape[0]}")
    m = m.copy()
    m.flags.writeable = False
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def zeros(n: int) -> np.ndarray:
    return np.zeros((n, n), dtype=complex)


def frobenius_norm(m) -> float:
    """Self-adjoint matrix norm: (sum of squared entry moduli)**0.5."""
    m = np.asarray(m, dtype=complex)
    return float(np.sqrt(np.sum(np.abs(m) ** 2)))


def invert(m) -> np.ndarray:
    """Inverse with a condition guard.

    Raises SingularMatrixError when the condition estimate exceeds
    COND_LIMIT or when the residual ||M @ inv - I||_F stays above
    1e-10 * n after one Newton refinement step.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(f"condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    inv = np.linalg.inv(m)
    eye = np.eye(n)
    if frobenius_norm(m @ inv - eye) > 1e-10 * n:
        inv = inv @ (2.0 * eye - m @ inv)
        if frobenius_norm(m @ inv - eye) > 1e-10 * n:
            raise SingularMatrixError("inverse residual too large")
    return inv


def is_hermitian(m, tol: float = 0.0) -> bool:
    """True iff max |m_ij - conj(m_ji)| <= tol."""
    m = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def block2n(tl, tr, bl, br) -> np.ndarray:
    """Assemble a 2n x 2n matrix from four order-n blocks."""
    tl, tr, bl, br = (np.asarray(b, dtype=complex) for b in (tl, tr, bl, br))
    n = tl.shape[0]
    for b in (tr, bl, br):
        if b.shape != (n, n):
            raise ShapeMismatchError("all four blocks must share the same order")
    return np.block([[tl, tr], [bl, br]])


def split2n(m) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of block2n."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ShapeMismatchError("expected an even-order square matrix")
    n = m.shape[0] // 2
    return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]


def matrix_to_json(m) -> list:
    """Nested arrays of [re, im] pairs; real matrices collapse to plain numbers."""
    m = np.asarray(m, dtype=complex)
    if np.all(m.imag == 0.0):
        return [[float(v.real) for v in row] for row in m]
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(obj, n: int | None = None) -> np.ndarray:
    """Parse the JSON matrix form: entries are numbers or [re, im] pairs."""
    if not isinstance(obj, list) or not obj:
        raise ValueError("matrix JSON must be a non-empty list of rows")
    rows = []
    for row in obj:
        if not isinstance(row, list):
            raise ValueError("matrix JSON rows must be lists")
        vals = []
        for v in row:
            if isinstance(v, (int, float)):
                vals.append(complex(v))
            elif isinstance(v, list) and len(v) == 2:
                vals.append(complex(float(v[0]), float(v[1])))
            else:
                raise ValueError(f"bad matrix entry {v!r}")
        rows.append(vals)
    return as_matrix(rows, n)
