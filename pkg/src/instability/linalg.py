"""Dense complex Hermitian linear algebra used everywhere else.

Conventions fixed here and inherited by every other module:

* matrices are ``numpy.ndarray`` of complex128, row-major;
* tensor products put the *left* factor in the most significant index
  position (``numpy.kron`` order);
* eigenvalues of a PSD operator below ``rank_tol = dim * 1e-13 * lambda_max``
  are treated as exact zeros for support decisions, and negative powers are
  taken on the support (pseudo-inverse convention);
* all logarithms elsewhere in the package are base 2.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

HERMITICITY_RTOL = 1e-12
DENSITY_TOL = 1e-10
EFFECT_TOL = 1e-10
RANK_RTOL = 1e-13


def herm(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^dagger) / 2."""
    return (a + a.conj().T) / 2


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr[A^dagger B]."""
    return complex(np.sum(a.conj() * b))


def as_matrix(a, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex matrix, optionally checking the dimension."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValidationError(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def check_hermitian(h, dim: int | None = None, *, what: str = "operator") -> np.ndarray:
    """Validate `h` is Hermitian within tolerance; return the Hermitian part."""
    m = as_matrix(h, dim)
    scale = max(1.0, spectral_norm(m))
    if spectral_norm(m - m.conj().T) > HERMITICITY_RTOL * scale:
        raise ValidationError(f"{what} is not Hermitian within tolerance")
    return herm(m)


def check_density(rho, dim: int | None = None) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD and unit trace within 1e-10."""
    m = check_hermitian(rho, dim, what="state")
    w = np.linalg.eigvalsh(m)
    scale = max(abs(w[0]), abs(w[-1]), 0.0)
    if w[0] < -DENSITY_TOL * max(scale, 1e-300):
        raise ValidationError(f"state has negative eigenvalue {w[0]:.3e}")
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValidationError(f"state trace {tr} differs from 1 beyond tolerance")
    return m


def check_psd(p, dim: int | None = None, *, what: str = "operator") -> np.ndarray:
    m = check_hermitian(p, dim, what=what)
    w = np.linalg.eigvalsh(m)
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    if w[0] < -DENSITY_TOL * scale:
        raise ValidationError(f"{what} has negative eigenvalue {w[0]:.3e}")
    return m


def check_effect(gamma, dim: int | None = None) -> np.ndarray:
    """Validate an effect: Hermitian with eigenvalues in [-1e-10, 1+1e-10]."""
    m = check_hermitian(gamma, dim, what="effect")
    w = np.linalg.eigvalsh(m)
    if w[0] < -EFFECT_TOL or w[-1] > 1.0 + EFFECT_TOL:
        raise ValidationError(
            f"effect eigenvalues [{w[0]:.3e}, {w[-1]:.3e}] escape [0, 1]"
        )
    return m


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator.

    Returns ascending eigenvalues and a unitary whose columns are the
    eigenvectors, so that ``H = V @ diag(w) @ V.conj().T``.
    """
    m = check_hermitian(h)
    w, v = np.linalg.eigh(m)
    return w, v


def rank_tol(dim: int, lambda_max: float) -> float:
    """Threshold below which PSD eigenvalues count as zero."""
    return dim * RANK_RTOL * abs(lambda_max)


def mat_pow(p: np.ndarray, r: float) -> np.ndarray:
    """Fractional power of a PSD operator with the support convention.

    Eigenvalues below ``rank_tol`` map to zero for every exponent, so
    negative powers act as pseudo-inverses on the support and ``r = 0``
    yields the support projector.
    """
    m = check_psd(p, what="mat_pow argument")
    w, v = np.linalg.eigh(m)
    cut = rank_tol(m.shape[0], abs(w[-1]) if m.shape[0] else 0.0)
    pw = np.zeros_like(w)
    live = w > cut
    pw[live] = w[live] ** float(r)
    return herm((v * pw) @ v.conj().T)


def support_projector(p: np.ndarray) -> np.ndarray:
    """Projector onto the support of a PSD operator."""
    return mat_pow(p, 0.0)


def schatten_norm(x: np.ndarray, p: float) -> float:
    """Schatten p-(quasi) norm for p in [1/2, inf]."""
    if not (p >= 0.5):
        raise ValidationError(f"Schatten order p={p} outside [1/2, inf]")
    m = check_hermitian(x, what="schatten_norm argument")
    s = np.abs(np.linalg.eigvalsh(m))
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s**p) ** (1.0 / p))


def trace_norm(x: np.ndarray) -> float:
    return schatten_norm(x, 1.0)


def tensor_product(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; the left factor is the most significant index."""
    if not ops:
        raise ValidationError("tensor_product needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(x: np.ndarray, dims: list[int], keep) -> np.ndarray:
    """Trace out all tensor factors not listed in `keep`.

    `dims` lists the local dimensions in tensor order (left = most
    significant); `keep` is an iterable of factor indices to retain, in
    their original relative order.
    """
    m = as_matrix(x)
    dims = [int(d) for d in dims]
    n = len(dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise ValidationError(
            f"factor dimensions {dims} inconsistent with matrix size {m.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} factors")
    t = m.reshape(dims + dims)
    # Trace the discarded factors pairwise, starting from the highest axis so
    # earlier axis numbers stay valid.
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + (t.ndim // 2))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def trace_distance(rho: np.ndarray, tau: np.ndarray) -> float:
    """(1/2) ||rho - tau||_1 for equal-dimension states."""
    a = as_matrix(rho)
    b = as_matrix(tau, a.shape[0])
    return 0.5 * trace_norm(a - b)
