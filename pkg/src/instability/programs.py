"""The three semidefinite programs behind the operational tasks.

* restricted hypothesis testing: the discriminating effect must satisfy
  Delta^*(Gamma) = c I, so the test cannot separate fixed states;
* hypothesis testing against the whole free set: minimize the largest
  eigenvalue of Delta^*(Gamma);
* smoothed max-relative entropy to the free cone over a trace-distance ball.

All equality constraints involving Delta^* are expressed in an orthonormal
Hermitian basis of the fixed-point algebra, which keeps the row space
full rank; membership of an algebra element in the PSD cone is imposed
blockwise on its B-factor components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DestructionChannel, hermitian_basis
from .errors import SolverError, ValidationError
from .linalg import check_density, herm
from .sdp import HermitianProgram, SdpSolution

DEFAULT_SOLVER_KW = dict(feas_tol=1e-8, gap_tol=1e-7, max_iter=200)


@dataclass(frozen=True)
class HypothesisTestingResult:
    value: float          # bits
    scale: float          # the optimal c (2^{-value})
    gamma: np.ndarray     # witnessing effect
    solution: SdpSolution


def _check_eps(eps: float) -> float:
    if not (0.0 <= eps <= 1.0):
        raise ValidationError(f"epsilon {eps} outside [0, 1]")
    return float(eps)


def _require_solved(sol: SdpSolution, what: str) -> None:
    if sol.status != "optimal":
        raise SolverError(f"{what}: solver returned status {sol.status!r}")


def _clip_effect(gamma: np.ndarray) -> np.ndarray:
    """Clip eigenvalues into [0, 1]; the solver can overshoot by its
    feasibility residual, which downstream consumers validate strictly."""
    w, v = np.linalg.eigh(herm(gamma))
    w = np.clip(w, 0.0, 1.0)
    return herm((v * w) @ v.conj().T)


def _polish_to_scaled_identity(
    gamma: np.ndarray, channel: DestructionChannel
) -> tuple[np.ndarray, float]:
    """Shift Gamma inside the algebra so Delta^*(Gamma) = c I holds exactly.

    Delta^* acts as the identity on its image, so adding the (tiny) algebra
    element c I - Delta^*(Gamma) cancels the solver's equality residual
    without moving Gamma more than that residual.
    """
    dual = herm(channel.apply_dual(gamma))
    c = float(np.trace(dual).real) / channel.dim
    polished = herm(gamma + (c * np.eye(channel.dim) - dual))
    return polished, c


def restricted_ht(
    rho, channel: DestructionChannel, eps: float, **solver_kw
) -> HypothesisTestingResult:
    """min c over effects with Delta^*(Gamma) = c I and tr[rho Gamma] >= 1 - eps.

    Returns the exponent -log2 c together with the witnessing effect, which
    is polished so its dual image is a scalar matrix to machine precision.
    """
    eps = _check_eps(eps)
    rho = check_density(rho, channel.dim)
    d = channel.dim
    if eps >= 1.0:
        return HypothesisTestingResult(
            float("inf"), 0.0, np.zeros((d, d), dtype=complex), _degenerate_solution()
        )
    kw = {**DEFAULT_SOLVER_KW, **solver_kw}
    prog = HermitianProgram()
    g = prog.add_hermitian(d)
    s = prog.add_hermitian(d)
    c = prog.add_scalar()
    prog.add_objective(c, 1.0)
    for h in hermitian_basis(d):
        prog.add_constraint({g: h, s: h}, float(np.real(np.trace(h))))
    for e in channel.algebra_basis():
        prog.add_constraint(
            {g: channel.apply(e), c: -float(np.real(np.trace(e)))}, 0.0
        )
    # At eps = 0 the pass constraint can only be met with equality; writing
    # it that way (no slack pinned at the cone boundary) keeps the
    # interior-point iterates strictly complementary.
    sense = "==" if eps <= 0.0 else ">="
    prog.add_constraint({g: rho}, 1.0 - eps, sense=sense)
    sol, vals = prog.solve(**kw)
    _require_solved(sol, "restricted hypothesis test")
    gamma, c_star = _polish_to_scaled_identity(_clip_effect(vals[g.index]), channel)
    if c_star <= 0:
        return HypothesisTestingResult(float("inf"), 0.0, gamma, sol)
    return HypothesisTestingResult(-float(np.log2(c_star)), c_star, gamma, sol)


def ht_free(
    rho, channel: DestructionChannel, eps: float, **solver_kw
) -> HypothesisTestingResult:
    """Hypothesis testing against the free set:
    min c s.t. 0 <= Gamma <= I, tr[rho Gamma] >= 1 - eps, Delta^*(Gamma) <= c I.

    At eps = 0 the program is solved exactly: a perfect test must contain
    the support projector of rho, and any surplus only raises the dual
    image, so Gamma = rho^0 is optimal and the value is the closed-form
    -log2 ||Delta^*(rho^0)||_inf.  (The eps = 0 feasible set has no strict
    interior, which would otherwise degrade interior-point accuracy.)
    """
    eps = _check_eps(eps)
    rho = check_density(rho, channel.dim)
    d = channel.dim
    if eps >= 1.0:
        return HypothesisTestingResult(
            float("inf"), 0.0, np.zeros((d, d), dtype=complex), _degenerate_solution()
        )
    if eps <= 0.0:
        from .linalg import support_projector

        gamma = support_projector(rho)
        c_star = float(np.linalg.eigvalsh(herm(channel.apply_dual(gamma)))[-1])
        value = -float(np.log2(c_star)) if c_star > 0 else float("inf")
        return HypothesisTestingResult(value, c_star, gamma, _degenerate_solution())
    kw = {**DEFAULT_SOLVER_KW, **solver_kw}
    prog = HermitianProgram()
    g = prog.add_hermitian(d)
    s = prog.add_hermitian(d)
    c = prog.add_scalar()
    z_blocks = [prog.add_hermitian(b.d_b) for b in channel.blocks]
    prog.add_objective(c, 1.0)
    for h in hermitian_basis(d):
        prog.add_constraint({g: h, s: h}, float(np.real(np.trace(h))))
    # c I - Delta^*(Gamma) = Z in algebra coordinates, Z >= 0 blockwise.
    for i, b in enumerate(channel.blocks):
        for h in hermitian_basis(b.d_b):
            e = channel.embed_algebra_element(
                [
                    h if j == i else np.zeros((bb.d_b, bb.d_b), dtype=complex)
                    for j, bb in enumerate(channel.blocks)
                ]
            )
            # <e, Delta^*(Gamma)> = <Delta(e), Gamma>; <e, I> = d_a tr[h]
            prog.add_constraint(
                {
                    g: channel.apply(e),
                    c: -float(b.d_a * np.real(np.trace(h))),
                    z_blocks[i]: b.d_a * h,
                },
                0.0,
            )
    prog.add_constraint({g: rho}, 1.0 - eps, sense=">=")
    sol, vals = prog.solve(**kw)
    _require_solved(sol, "free hypothesis test")
    gamma = _clip_effect(vals[g.index])
    dual = herm(channel.apply_dual(gamma))
    c_star = float(np.linalg.eigvalsh(dual)[-1])
    if c_star <= 0:
        return HypothesisTestingResult(float("inf"), 0.0, gamma, sol)
    return HypothesisTestingResult(-float(np.log2(c_star)), c_star, gamma, sol)


@dataclass(frozen=True)
class SmoothedDmaxResult:
    value: float            # bits
    tau: np.ndarray         # the smoothed state inside the eps-ball
    omega: np.ndarray       # free-cone operator with omega >= tau
    solution: SdpSolution


def dmax_smoothed_free(
    rho, channel: DestructionChannel, eps: float, **solver_kw
) -> SmoothedDmaxResult:
    """Smoothed max-relative entropy to the free set.

    Minimizes log2 tr[omega] over free-cone omega >= tau where tau ranges
    over the trace-distance eps-ball around rho (P >= tau - rho, P >= 0,
    tr P <= eps witnesses the ball membership).
    """
    eps = _check_eps(eps)
    rho = check_density(rho, channel.dim)
    d = channel.dim
    kw = {**DEFAULT_SOLVER_KW, **solver_kw}
    prog = HermitianProgram()
    rr = prog.add_hermitian(d)         # rr = omega - tau >= 0
    betas = [prog.add_hermitian(b.d_b) for b in channel.blocks]
    for i, b in enumerate(channel.blocks):
        prog.add_objective(betas[i], np.eye(b.d_b))  # tr[omega] = sum tr[beta_i]
    if eps <= 0.0:
        # The ball collapses to {rho}; dropping the ball blocks avoids
        # variables pinned at the cone boundary (degenerate for the solver).
        t = None
        for h in hermitian_basis(d):
            terms = {rr: -h}
            for i, b in enumerate(channel.blocks):
                terms[betas[i]] = channel.dual_block_reduction(h, i)
            prog.add_constraint(terms, float(np.real(np.trace(h.conj().T @ rho))))
    else:
        t = prog.add_hermitian(d)      # tau
        p = prog.add_hermitian(d)      # ball witness
        q = prog.add_hermitian(d)      # q = p - tau + rho >= 0
        prog.add_constraint({t: np.eye(d)}, 1.0)
        prog.add_constraint({p: np.eye(d)}, eps, sense="<=")
        for h in hermitian_basis(d):
            rhs = float(np.real(np.trace(h.conj().T @ rho)))
            prog.add_constraint({q: h, p: -h, t: h}, rhs)
            # omega(beta) - tau - rr = 0, with omega = (+) tau_i (x) beta_i:
            # the beta_i coefficient of <h, omega> is the dual block
            # reduction.
            terms = {t: -h, rr: -h}
            for i, b in enumerate(channel.blocks):
                terms[betas[i]] = channel.dual_block_reduction(h, i)
            prog.add_constraint(terms, 0.0)
    sol, vals = prog.solve(**kw)
    _require_solved(sol, "smoothed max-relative entropy")
    tau = rho if t is None else herm(vals[t.index])
    omega = _free_cone_element(channel, [vals[b.index] for b in betas])
    total = max(sol.primal_objective, 1e-300)
    return SmoothedDmaxResult(float(np.log2(total)), tau, omega, sol)


def _free_cone_element(channel: DestructionChannel, betas) -> np.ndarray:
    out = np.zeros((channel.dim, channel.dim), dtype=complex)
    for i, b in enumerate(channel.blocks):
        out[channel._slices[i], channel._slices[i]] = np.kron(
            b.tau, herm(np.asarray(betas[i], dtype=complex))
        )
    return channel.from_block_frame(out)


def _degenerate_solution() -> SdpSolution:
    return SdpSolution(
        status="optimal",
        x=np.zeros(0),
        y=np.zeros(0),
        s=np.zeros(0),
        primal_objective=0.0,
        dual_objective=0.0,
        gap=0.0,
        primal_residual=0.0,
        dual_residual=0.0,
        iterations=0,
        block_dims=[],
    )
