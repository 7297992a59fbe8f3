"""Two-argument quantum divergences, all in bits (log base 2).

The alpha-z family is evaluated as

    Q_{a,z}(rho || S) = tr[ (rho^{a/2z} S^{(1-a)/z} rho^{a/2z})^z ]
    D_{a,z}(rho || S) = log2(Q) / (a - 1)

which satisfies the second-argument scaling rule
``D(rho || t S) = D(rho || S) - log2 t`` and reduces to the Petz family at
z = 1, the sandwiched family at z = alpha, and the Umegaki/min/max special
cases handled separately below.  Support conventions: negative operator
powers act on the support, and D = +inf when alpha > 1 and supp(rho) is not
contained in supp(S) (or, for alpha < 1, when the arguments are orthogonal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import (
    check_density,
    check_psd,
    herm,
    mat_pow,
    rank_tol,
    support_projector,
)

LOG2 = np.log(2.0)


def in_dpi_region(alpha: float, z: float) -> bool:
    """Membership in the alpha-z region where data processing holds."""
    if alpha <= 0 or z <= 0:
        return False
    if alpha < 1:
        return z >= max(alpha, 1.0 - alpha)
    if alpha == 1:
        return True
    return max(alpha / 2.0, alpha - 1.0) <= z <= alpha


@dataclass(frozen=True)
class RenyiParams:
    alpha: float
    z: float

    def __post_init__(self):
        if not in_dpi_region(self.alpha, self.z):
            raise ValidationError(
                f"(alpha={self.alpha}, z={self.z}) outside the data-processing region"
            )


def _support_dominates(s: np.ndarray, rho: np.ndarray) -> bool:
    """supp(rho) contained in supp(s), both PSD."""
    proj = support_projector(s)
    leak = float(np.trace(rho - proj @ rho @ proj).real)
    return leak <= 10 * rank_tol(rho.shape[0], max(np.linalg.eigvalsh(rho).max(), 1e-300))


def quasi_entropy(rho: np.ndarray, s: np.ndarray, alpha: float, z: float) -> float:
    """Q_{a,z}(rho || S) = tr[(rho^{a/2z} S^{(1-a)/z} rho^{a/2z})^z]."""
    half = mat_pow(rho, alpha / (2.0 * z))
    mid = mat_pow(s, (1.0 - alpha) / z)
    core = herm(half @ mid @ half)
    w = np.linalg.eigvalsh(core)
    w = np.clip(w, 0.0, None)
    return float(np.sum(w**z))


def d_alpha_z(rho, s, params: RenyiParams | None = None, *, alpha=None, z=None) -> float:
    """alpha-z Renyi divergence in bits; +inf on support violations."""
    if params is None:
        params = RenyiParams(float(alpha), float(z))
    rho = check_density(rho)
    s = check_psd(s, rho.shape[0], what="second argument")
    if float(np.trace(s).real) <= 0:
        raise ValidationError("second argument must be nonzero")
    a, zz = params.alpha, params.z
    if a == 1.0:
        return umegaki(rho, s)
    if a > 1.0 and not _support_dominates(s, rho):
        return float("inf")
    q = quasi_entropy(rho, s, a, zz)
    if q <= 0.0:
        # Orthogonal arguments at alpha < 1; documented as +inf.
        return float("inf")
    return float(np.log2(q) / (a - 1.0))


def umegaki(rho, s) -> float:
    """Umegaki relative entropy tr[rho log rho] - tr[rho log S], in bits."""
    rho = check_density(rho)
    s = check_psd(s, rho.shape[0], what="second argument")
    if not _support_dominates(s, rho):
        return float("inf")
    w_r, v_r = np.linalg.eigh(rho)
    cut_r = rank_tol(rho.shape[0], max(abs(w_r[-1]), 1e-300))
    w_s, v_s = np.linalg.eigh(s)
    cut_s = rank_tol(s.shape[0], max(abs(w_s[-1]), 1e-300))
    ent = float(np.sum(w_r[w_r > cut_r] * np.log(w_r[w_r > cut_r])))
    log_s = (v_s * np.where(w_s > cut_s, np.log(np.clip(w_s, 1e-300, None)), 0.0)) @ v_s.conj().T
    cross = float(np.trace(rho @ log_s).real)
    return (ent - cross) / LOG2


def d_min(rho, s) -> float:
    """-log2 tr[S rho^0] with rho^0 the support projector of rho."""
    rho = check_density(rho)
    s = check_psd(s, rho.shape[0], what="second argument")
    overlap = float(np.trace(s @ support_projector(rho)).real)
    if overlap <= 0.0:
        return float("inf")
    return -float(np.log2(overlap))


def d_max(rho, s) -> float:
    """log2 of the smallest t with t*S >= rho; +inf on support violation."""
    rho = check_density(rho)
    s = check_psd(s, rho.shape[0], what="second argument")
    if not _support_dominates(s, rho):
        return float("inf")
    inv_half = mat_pow(s, -0.5)
    lam = np.linalg.eigvalsh(herm(inv_half @ rho @ inv_half))[-1]
    if lam <= 0.0:
        return float("-inf") if lam == 0 else float("nan")
    return float(np.log2(lam))


# ---------------------------------------------------------------------------
# Hypothesis testing (Neyman-Pearson)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisTest:
    """Optimal test for min tr[sigma Gamma] s.t. tr[rho Gamma] >= 1 - eps."""

    value: float  # -log2 of the optimal type-II error (bits)
    type_two_error: float
    gamma: np.ndarray
    threshold: float  # Lagrange multiplier lambda at the optimum


def _positive_part_data(rho, sigma, lam, *, ker_rtol=0.0):
    m = herm(lam * rho - sigma)
    w, v = np.linalg.eigh(m)
    scale = max(np.abs(w).max(initial=0.0), 1e-300)
    pos = w > ker_rtol * scale
    ker = np.abs(w) <= ker_rtol * scale
    return w, v, pos, ker


def _type_one_pass(rho, sigma, lam) -> float:
    # Strict threshold: the bisection then converges onto the true
    # eigenvalue crossing, and the final (wider) kernel window below safely
    # contains it.
    _, v, pos, _ = _positive_part_data(rho, sigma, lam)
    vp = v[:, pos]
    return float(np.real(np.trace(vp.conj().T @ rho @ vp)))


def neyman_pearson(rho, sigma, eps: float) -> HypothesisTest:
    """Exact optimal hypothesis test between rho and a PSD sigma.

    The optimal effect has the form "projector onto the strictly positive
    eigenspace of lambda*rho - sigma, plus a fraction of its kernel".  The
    passing probability tr[rho Gamma(lambda)] is nondecreasing in lambda
    (it is the derivative of the concave Lagrange dual), so the right
    lambda is found by bisection; jumps at eigenvalue crossings are handled
    through the kernel fraction.
    """
    rho = check_density(rho)
    sigma = check_psd(sigma, rho.shape[0], what="second argument")
    if not (0.0 <= eps <= 1.0):
        raise ValidationError(f"epsilon {eps} outside [0, 1]")
    d = rho.shape[0]
    if eps >= 1.0:
        return HypothesisTest(float("inf"), 0.0, np.zeros((d, d), dtype=complex), 0.0)
    target = 1.0 - eps
    if eps <= 0.0:
        # tr[rho Gamma] = 1 forces Gamma to act as identity on supp rho.
        gamma = support_projector(rho)
        beta = float(np.trace(sigma @ gamma).real)
        value = -float(np.log2(beta)) if beta > 0 else float("inf")
        return HypothesisTest(value, beta, gamma, float("inf"))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if _type_one_pass(rho, sigma, hi) >= target:
            break
        hi *= 4.0
    else:
        raise ValidationError("failed to bracket the Neyman-Pearson threshold")
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if _type_one_pass(rho, sigma, mid) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break

    _, v, pos, ker = _positive_part_data(rho, sigma, hi, ker_rtol=1e-10)
    vp, vk = v[:, pos], v[:, ker]
    proj_pos = vp @ vp.conj().T
    proj_ker = vk @ vk.conj().T
    a_pos = float(np.trace(rho @ proj_pos).real)
    a_ker = float(np.trace(rho @ proj_ker).real)
    if a_pos >= target or a_ker <= 1e-15:
        frac = 0.0
    else:
        frac = min(1.0, max(0.0, (target - a_pos) / a_ker))
    gamma = herm(proj_pos + frac * proj_ker)
    beta = float(np.trace(sigma @ gamma).real)
    beta = max(beta, 0.0)
    value = -float(np.log2(beta)) if beta > 0 else float("inf")
    return HypothesisTest(value, beta, gamma, hi)


def d_hypothesis(rho, sigma, eps: float) -> float:
    """Hypothesis-testing divergence D_H^eps(rho || sigma) in bits."""
    return neyman_pearson(rho, sigma, eps).value
