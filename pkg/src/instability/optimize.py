"""Optimization of trace functionals over the free-state family.

The central object is F(sigma) = tr[(sigma^{r/2} X sigma^{r/2})^z] for a PSD
payload X, optimized over the fixed states of a destruction channel.  The
optimizer satisfies the implicit equation

    sigma_* proportional to Delta((sigma_*^{r/2} X sigma_*^{r/2})^z)

which is solved by a damped fixed-point iteration, with closed forms at
z = 1 (and hence for the whole Petz family) and a grid fallback.  F is
concave for r in [0, 1] (maximized) and convex for r in [-1, 0] (minimized).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    DestructionChannel,
    enumerate_free_grid,
    free_parameter_count,
)
from .divergences import RenyiParams, umegaki
from .errors import BudgetError, SolverError, ValidationError
from .linalg import (
    check_density,
    check_psd,
    herm,
    mat_pow,
    schatten_norm,
    support_projector,
    trace_norm,
)

FIXED_POINT_STEP_TOL = 1e-11
FIXED_POINT_MAX_ITER = 10_000
FIXED_POINT_RESIDUAL_TOL = 1e-9
ETA_FLOOR = 1.0 / 64.0
INIT_MIX = 1e-3


def check_functional_region(r: float, z: float) -> None:
    """(r, z) region where F is convex or concave with a free-state optimizer."""
    if not (-1.0 <= r <= 1.0) or z <= 0:
        raise ValidationError(f"(r={r}, z={z}) outside [-1,1] x (0,inf)")
    if 0.0 < r < 1.0 and z > 1.0 / r + 1e-12:
        raise ValidationError(f"(r={r}, z={z}) violates z <= 1/r")
    if r == 1.0 and z >= 1.0:
        raise ValidationError("r = 1 requires z < 1")


@dataclass(frozen=True)
class TraceFunctionalSpec:
    x: np.ndarray
    r: float
    z: float
    channel: DestructionChannel

    def __post_init__(self):
        check_functional_region(self.r, self.z)
        object.__setattr__(
            self, "x", check_psd(self.x, self.channel.dim, what="payload X")
        )
        if float(np.trace(self.x).real) <= 0:
            raise ValidationError("payload X must be nonzero")


@dataclass(frozen=True)
class OptimizerResult:
    """Outcome of a free-state optimization.

    ``value`` is F(sigma_star) for the raw trace-functional entry points and
    the divergence in bits for the monotone wrappers; ``residual`` is the
    trace-norm defect of the implicit fixed-point equation at sigma_star.
    """

    sigma_star: np.ndarray
    value: float
    residual: float
    iterations: int
    method: str


def _functional_value(sigma: np.ndarray, x: np.ndarray, r: float, z: float) -> float:
    core = herm(mat_pow(sigma, r / 2.0) @ x @ mat_pow(sigma, r / 2.0))
    w = np.clip(np.linalg.eigvalsh(core), 0.0, None)
    return float(np.sum(w**z))


def _iteration_map(sigma, x, r, z, channel):
    """normalize(Delta(G(sigma))) with G(s) = (s^{r/2} X s^{r/2})^z."""
    half = mat_pow(sigma, r / 2.0)
    g = mat_pow(herm(half @ x @ half), z)
    t = herm(channel.apply(g))
    tr = float(np.trace(t).real)
    if tr <= 0:
        raise SolverError("iteration map produced a zero-trace operator")
    return t / tr


def fixed_point_residual(sigma, spec: TraceFunctionalSpec) -> float:
    """Trace-norm defect of sigma against the implicit optimizer equation."""
    return trace_norm(sigma - _iteration_map(sigma, spec.x, spec.r, spec.z, spec.channel))


def _has_unique_free_state(channel: DestructionChannel) -> bool:
    return len(channel.blocks) == 1 and channel.blocks[0].d_b == 1


def _default_init(spec: TraceFunctionalSpec) -> np.ndarray:
    seed = herm(spec.channel.apply(spec.x))
    tr = float(np.trace(seed).real)
    base = seed / tr if tr > 0 else spec.channel.fixed_state()
    return herm((1.0 - INIT_MIX) * base + INIT_MIX * spec.channel.fixed_state())


def optimize_trace_functional(
    spec: TraceFunctionalSpec,
    *,
    init: np.ndarray | None = None,
    step_tol: float = FIXED_POINT_STEP_TOL,
    max_iter: int = FIXED_POINT_MAX_ITER,
    residual_tol: float = FIXED_POINT_RESIDUAL_TOL,
    method: str = "auto",
    grid_resolution: int = 21,
) -> OptimizerResult:
    """Optimize F over the free states of the channel.

    ``method`` is "auto" (closed form when z = 1, otherwise the damped
    fixed-point iteration), "fixed_point", or "closed_form".
    """
    if method not in ("auto", "fixed_point", "closed_form"):
        raise ValidationError(f"unknown method {method!r}")
    if method != "fixed_point":
        if _has_unique_free_state(spec.channel):
            sigma = spec.channel.fixed_state()
            return OptimizerResult(
                sigma_star=sigma,
                value=_functional_value(sigma, spec.x, spec.r, spec.z),
                residual=fixed_point_residual(sigma, spec),
                iterations=0,
                method="closed_form_z1",
            )
        if spec.z == 1.0 and spec.r < 1.0:
            return z1_closed_form(spec.x, spec.r, spec.channel)
        if method == "closed_form":
            raise ValidationError("no closed form available for z != 1")

    maximize = spec.r >= 0.0
    sigma = _default_init(spec) if init is None else check_density(init, spec.channel.dim)
    f_cur = _functional_value(sigma, spec.x, spec.r, spec.z)
    eta = 1.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        target = _iteration_map(sigma, spec.x, spec.r, spec.z, spec.channel)
        step = herm((1.0 - eta) * sigma + eta * target)
        f_new = _functional_value(step, spec.x, spec.r, spec.z)
        worse = f_new < f_cur - 1e-15 * (1 + abs(f_cur)) if maximize else (
            f_new > f_cur + 1e-15 * (1 + abs(f_cur))
        )
        if worse and eta > ETA_FLOOR:
            eta = max(eta / 2.0, ETA_FLOOR)
            continue
        delta = trace_norm(step - sigma)
        sigma, f_cur = step, f_new
        if delta < step_tol:
            break
    residual = fixed_point_residual(sigma, spec)
    if residual <= residual_tol:
        return OptimizerResult(sigma, f_cur, residual, iterations, "fixed_point")
    # Non-convergence: fall back to the exhaustive grid when it is small.
    sigma_g, value_g = grid_oracle(spec, resolution=grid_resolution)
    return OptimizerResult(
        sigma_g,
        value_g,
        fixed_point_residual(sigma_g, spec),
        iterations,
        "grid_fallback",
    )


def z1_closed_form(x, r: float, channel: DestructionChannel) -> OptimizerResult:
    """Exact optimizer for z = 1.

    sigma_* is proportional to T(Delta^*(T^{r-1}(X))^{1/(1-r)}) with T the
    twist by Delta(I)^{1/2}, and F(sigma_*) equals the Schatten 1/(1-r)
    norm of Delta^*(T^{r-1}(X)).
    """
    if r == 1.0:
        raise ValidationError("the z = 1 closed form requires r < 1")
    if not (-1.0 <= r < 1.0):
        raise ValidationError(f"r={r} outside [-1, 1)")
    x = check_psd(x, channel.dim, what="payload X")
    twisted = herm(channel.apply_dual(channel.twist(x, r - 1.0)))
    value = schatten_norm(twisted, 1.0 / (1.0 - r))
    core = channel.twist(mat_pow(twisted, 1.0 / (1.0 - r)), 1.0)
    tr = float(np.trace(core).real)
    if tr <= 0:
        raise SolverError("z=1 closed form produced a zero-trace optimizer")
    sigma = herm(core / tr)
    spec = TraceFunctionalSpec(x, r, 1.0, channel)
    return OptimizerResult(
        sigma, value, fixed_point_residual(sigma, spec), 0, "closed_form_z1"
    )


def pythagorean_factor(sigma, sigma_star, r: float) -> float:
    """tr[sigma^r sigma_star^{1-r}], the factor splitting F at z = 1."""
    return float(
        np.trace(mat_pow(sigma, r) @ mat_pow(sigma_star, 1.0 - r)).real
    )


# ---------------------------------------------------------------------------
# Monotones (values in bits)
# ---------------------------------------------------------------------------


def umegaki_free(rho, channel: DestructionChannel) -> OptimizerResult:
    """Umegaki divergence to the free set; the optimizer is Delta(rho)."""
    rho = check_density(rho, channel.dim)
    sigma = herm(channel.apply(rho))
    return OptimizerResult(sigma, umegaki(rho, sigma), 0.0, 0, "closed_form_z1")


def d_min_free(rho, channel: DestructionChannel) -> float:
    """D_min to the free set: -log2 ||Delta^*(rho^0)||_inf."""
    rho = check_density(rho, channel.dim)
    top = float(
        np.linalg.eigvalsh(herm(channel.apply_dual(support_projector(rho))))[-1]
    )
    if top <= 0:
        return float("inf")
    return -float(np.log2(top))


def _d_min_optimizer(rho, channel: DestructionChannel) -> np.ndarray:
    """A free state attaining sup tr[sigma rho^0] (top dual eigenvector)."""
    proj = support_projector(rho)
    best_val, best = -np.inf, None
    for i, _ in enumerate(channel.blocks):
        w_i = channel.dual_block_reduction(proj, i)
        w, v = np.linalg.eigh(herm(w_i))
        if w[-1] > best_val:
            best_val, best = w[-1], (i, v[:, -1])
    i, vec = best
    out = np.zeros((channel.dim, channel.dim), dtype=complex)
    out[channel._slices[i], channel._slices[i]] = np.kron(
        channel.blocks[i].tau, np.outer(vec, vec.conj())
    )
    return channel.from_block_frame(out)


def petz_free(rho, alpha: float, channel: DestructionChannel) -> OptimizerResult:
    """Petz divergence to the free set, alpha in [0, 2], via the closed form."""
    rho = check_density(rho, channel.dim)
    if not (0.0 <= alpha <= 2.0):
        raise ValidationError(f"alpha={alpha} outside [0, 2]")
    if alpha == 1.0:
        return umegaki_free(rho, channel)
    if alpha == 0.0:
        sigma = _d_min_optimizer(rho, channel)
        return OptimizerResult(sigma, d_min_free(rho, channel), 0.0, 0, "closed_form_petz")
    base = z1_closed_form(mat_pow(rho, alpha), 1.0 - alpha, channel)
    bits = float(np.log2(base.value) / (alpha - 1.0))
    return OptimizerResult(
        base.sigma_star, bits, base.residual, 0, "closed_form_petz"
    )


def d_alpha_z_free(rho, alpha: float, z: float, channel: DestructionChannel, **kw) -> OptimizerResult:
    """alpha-z divergence to the free set (bits)."""
    return m_lambda(rho, alpha, z, 0.0, channel, **kw)


def m_lambda(
    rho,
    alpha: float,
    z: float,
    lam: float,
    channel: DestructionChannel,
    **solver_kw,
) -> OptimizerResult:
    """The additive three-parameter monotone family (bits).

    With X_rho = rho^{a/2z} Delta(rho)^{lam(1-a)/2z}, the value is

        inf over free sigma of log2 tr[(X_rho sigma^{(1-lam)(1-a)/z} X_rho^*)^z] / (a-1)

    which interpolates between the optimized divergence (lam = 0) and the
    divergence to Delta(rho) (lam = 1, where no optimization is needed).
    """
    params = RenyiParams(alpha, z)
    if not (0.0 <= lam <= 1.0):
        raise ValidationError(f"lambda={lam} outside [0, 1]")
    rho = check_density(rho, channel.dim)
    if alpha == 1.0:
        # The whole family collapses onto the Umegaki monotone at alpha = 1.
        return umegaki_free(rho, channel)
    delta_rho = herm(channel.apply(rho))
    wing = mat_pow(delta_rho, lam * (1.0 - alpha) / (2.0 * z))
    x = herm(wing @ mat_pow(rho, alpha / z) @ wing)
    r = (1.0 - lam) * (1.0 - alpha) / z
    if lam == 1.0:
        # F no longer depends on sigma; Delta(X^z) solves the implicit
        # equation exactly and tr[X^z] is the common value.
        xz = mat_pow(x, z)
        q = float(np.trace(xz).real)
        sigma = herm(channel.apply(xz)) / q
        bits = float(np.log2(q) / (alpha - 1.0)) if q > 0 else float("inf")
        return OptimizerResult(sigma, bits, 0.0, 0, "endpoint")
    spec = TraceFunctionalSpec(x, r, z, channel)
    init = solver_kw.pop("init", None)
    if init is None:
        init = herm(
            (1.0 - INIT_MIX) * delta_rho + INIT_MIX * channel.fixed_state()
        )
    base = optimize_trace_functional(spec, init=init, **solver_kw)
    if base.value <= 0:
        bits = float("inf")
    else:
        bits = float(np.log2(base.value) / (alpha - 1.0))
    return OptimizerResult(base.sigma_star, bits, base.residual, base.iterations, base.method)


# ---------------------------------------------------------------------------
# Grid oracle
# ---------------------------------------------------------------------------

GRID_PARAMETER_BUDGET = 4


def grid_oracle(
    spec: TraceFunctionalSpec, resolution: int = 21
) -> tuple[np.ndarray, float]:
    """Exhaustive evaluation of F over the free-state grid.

    Refuses when the family has more than GRID_PARAMETER_BUDGET scalar
    parameters; independent of the fixed-point and closed-form paths.
    """
    n_par = free_parameter_count(spec.channel)
    if n_par > GRID_PARAMETER_BUDGET:
        raise BudgetError(
            f"free family has {n_par} parameters, grid budget is {GRID_PARAMETER_BUDGET}"
        )
    maximize = spec.r >= 0.0
    best_sigma, best_val = None, -np.inf if maximize else np.inf
    for sigma in enumerate_free_grid(spec.channel, resolution):
        val = _functional_value(sigma, spec.x, spec.r, spec.z)
        if (val > best_val) if maximize else (val < best_val):
            best_sigma, best_val = sigma, val
    return best_sigma, float(best_val)
