"""Dense complex linear algebra for 2x2 and 4x4 operators.

Everything here works on plain complex numpy arrays in natural units
(hbar = k_B = 1, frequencies in units of a reference frequency).  Joint
operators use row-major Kronecker ordering, system factor first, so a
4x4 matrix indexes as (system, auxiliary) x (system, auxiliary).
All functions are pure; validation failures raise ``ValueError``.
"""

from __future__ import annotations

import numpy as np

# Validation tolerances: Hermiticity/positivity checks are tight (1e-12),
# unitarity checks looser (1e-10) since they accumulate matmul rounding.
HERMITIAN_TOL = 1e-12
DENSITY_TOL = 1e-12
UNITARY_TOL = 1e-10
DEGENERACY_TOL = 1e-9

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)

KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


def projector(ket: np.ndarray) -> np.ndarray:
    """Rank-one projector |k><k| of a (not necessarily normalized) ket."""
    k = np.asarray(ket, dtype=complex)
    k = k / np.linalg.norm(k)
    return np.outer(k, k.conj())


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex array with dimension 2 or 4."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] not in (2, 4):
        raise ValueError(f"{name} must be 2x2 or 4x4, got {a.shape[0]}x{a.shape[0]}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    return a


def validate_hermitian(m, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if np.max(np.abs(a - a.conj().T)) > tol:
        raise ValueError(f"{name} is not Hermitian within {tol}")
    return a


def validate_density_matrix(rho, tol: float = DENSITY_TOL, name: str = "rho") -> np.ndarray:
    """Check Hermiticity, unit trace and positive semidefiniteness (to tol)."""
    a = validate_hermitian(rho, tol, name)
    if abs(np.trace(a) - 1.0) > tol:
        raise ValueError(f"{name} trace is {np.trace(a).real}, expected 1 within {tol}")
    if np.linalg.eigvalsh(a).min() < -tol:
        raise ValueError(f"{name} has an eigenvalue below -{tol}")
    return a


def validate_unitary(u, tol: float = UNITARY_TOL, name: str = "u") -> np.ndarray:
    a = as_matrix(u, name)
    if np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) > tol:
        raise ValueError(f"{name} is not unitary within {tol}")
    return a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices, system factor first."""
    ma = as_matrix(a, "a")
    mb = as_matrix(b, "b")
    if ma.shape != (2, 2) or mb.shape != (2, 2):
        raise ValueError(f"tensor_product expects 2x2 factors, got {ma.shape} and {mb.shape}")
    return np.kron(ma, mb)


def partial_trace_aux(rho_sa) -> np.ndarray:
    """System marginal of a 4x4 joint density matrix (traces out the second factor)."""
    a = validate_density_matrix(rho_sa, name="rho_sa")
    if a.shape != (4, 4):
        raise ValueError(f"partial_trace_aux expects a 4x4 matrix, got {a.shape}")
    return a.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)


def partial_trace_sys(rho_sa) -> np.ndarray:
    """Auxiliary marginal of a 4x4 joint density matrix (traces out the first factor)."""
    a = validate_density_matrix(rho_sa, name="rho_sa")
    if a.shape != (4, 4):
        raise ValueError(f"partial_trace_sys expects a 4x4 matrix, got {a.shape}")
    return a.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    # Make the first non-negligible component of each column real positive.
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            lead = col[nz[0]]
            out[:, j] = col * (abs(lead) / lead)
    return out


def hermitian_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a deterministic layout.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors in the columns.  Column phases are fixed so the first
    nonzero component is real positive, and columns inside a degenerate
    cluster are ordered lexicographically by (Re, Im) of their components,
    so repeated runs (and downstream regressions) see identical output.
    """
    a = validate_hermitian(h, name="h")
    vals, vecs = np.linalg.eigh(a)
    vecs = _phase_fix(vecs)
    n = vals.size
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= DEGENERACY_TOL * max(1.0, abs(vals[j])):
            j += 1
        if j - i > 1:
            order = sorted(
                range(i, j),
                key=lambda k: tuple(np.stack([vecs[:, k].real, vecs[:, k].imag], 1).ravel()),
            )
            vals[i:j] = vals[order]
            vecs[:, i:j] = vecs[:, order]
        i = j
    return vals, vecs


def exp_i_hermitian(g) -> np.ndarray:
    """exp(iG) for Hermitian G via exact eigendecomposition.

    For the 2x2 and 4x4 generators used here this is accurate to machine
    precision, so no series or scaling-and-squaring is needed.
    """
    a = validate_hermitian(g, name="g")
    vals, vecs = np.linalg.eigh(a)
    return (vecs * np.exp(1.0j * vals)) @ vecs.conj().T


def von_neumann_entropy(rho) -> float:
    """Entropy -sum(p log2 p) in bits, with the 0 log 0 = 0 convention.

    Eigenvalues in [-DENSITY_TOL, 0) are clamped to zero first so
    floating-point noise cannot poison the logarithm.
    """
    a = validate_density_matrix(rho, name="rho")
    vals = np.linalg.eigvalsh(a)
    vals = np.clip(vals, 0.0, None)
    vals = vals[vals > 0.0]
    return float(max(-(vals * np.log2(vals)).sum(), 0.0))
