"""One-shot distillation and dilution, assisted yields, and diagnostics.

Currency: the reference state at level m > 0 is |0><0| on a classical
two-level system whose destruction channel replaces every state by
gamma_m = diag(2^-m, 1 - 2^-m).  Distillation to the currency reduces to a
binary measurement determined by a single effect; dilution to a
preparation channel; both witnesses are produced and re-verified here.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import (
    DestructionChannel,
    InstabilitySystem,
    basis_state,
    replacer,
    system,
    tensor_compose,
)
from .divergences import d_max
from .errors import ValidationError
from .linalg import check_effect, herm, spectral_norm, trace_distance, trace_norm
from .optimize import d_min_free, umegaki_free
from .programs import dmax_smoothed_free, ht_free, restricted_ht

log = logging.getLogger("instability.tasks")


@dataclass(frozen=True)
class CurrencyState:
    """Reference resource state phi_m on its two-level replacer system."""

    m: float
    state: np.ndarray = field(init=False)
    system: InstabilitySystem = field(init=False)

    def __post_init__(self):
        if not (self.m > 0):
            raise ValidationError("currency level m must be positive (gamma_0 is singular)")
        gamma = np.diag([2.0**-self.m, 1.0 - 2.0**-self.m]).astype(complex)
        object.__setattr__(self, "state", basis_state(2, 0))
        object.__setattr__(self, "system", system(replacer(gamma)))


def currency(m: float) -> CurrencyState:
    return CurrencyState(float(m))


@dataclass
class TaskReport:
    quantity: str            # yield | cost | cost_interval | battery_yield | catalytic_yield0
    value: float | tuple
    epsilon: float
    witness: dict
    residuals: dict

    def as_dict(self) -> dict:
        def clean(v):
            if isinstance(v, np.ndarray):
                from .serialize import matrix_to_json

                return matrix_to_json(v)
            if isinstance(v, float) and np.isinf(v):
                return "inf"
            return v

        return {
            "quantity": self.quantity,
            "value": list(self.value) if isinstance(self.value, tuple) else clean(self.value),
            "epsilon": self.epsilon,
            "witness": {k: clean(v) for k, v in self.witness.items()},
            "residuals": {k: clean(v) for k, v in self.residuals.items()},
        }


# ---------------------------------------------------------------------------
# Channel actions and covariance checking
# ---------------------------------------------------------------------------


def matrix_units(dim: int):
    for j in range(dim):
        for k in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = 1.0
            yield e


def covariance_check(
    action: Callable[[np.ndarray], np.ndarray],
    ch_in: DestructionChannel,
    ch_out: DestructionChannel,
) -> float:
    """Max over matrix units of ||N(Delta_in(E)) - Delta_out(N(E))||_1.

    Because both sides are linear in E, a small residual on the full matrix
    unit basis certifies covariance of the channel everywhere.
    """
    worst = 0.0
    for e in matrix_units(ch_in.dim):
        lhs = action(ch_in.apply(e))
        rhs = ch_out.apply(action(e))
        worst = max(worst, trace_norm(lhs - rhs))
    return worst


def measurement_action(gamma: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Binary measurement channel t -> tr[t G]|0><0| + tr[t (I-G)]|1><1|."""
    dim = gamma.shape[0]
    eye = np.eye(dim)

    def act(t: np.ndarray) -> np.ndarray:
        p0 = complex(np.trace(t @ gamma))
        p1 = complex(np.trace(t @ (eye - gamma)))
        return np.diag([p0, p1]).astype(complex)

    return act


def preparation_action(out0: np.ndarray, out1: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Classical-input preparation channel |x><x| -> out_x (off-diagonals die)."""

    def act(t: np.ndarray) -> np.ndarray:
        return t[0, 0] * out0 + t[1, 1] * out1

    return act


# ---------------------------------------------------------------------------
# One-shot tasks
# ---------------------------------------------------------------------------


def one_shot_yield(rho, sys: InstabilitySystem, eps: float, **solver_kw) -> TaskReport:
    """Distillable currency at error eps, with the measurement witness."""
    res = restricted_ht(rho, sys.channel, eps, **solver_kw)
    m = res.value
    if not np.isfinite(m) or m <= 1e-9:
        # Nothing distillable beyond solver noise (or degenerate eps):
        # report without a witness channel, since the currency system needs
        # a full-rank Gibbs weight and hence a level bounded away from 0.
        return TaskReport(
            "yield",
            max(m, 0.0) if np.isfinite(m) else m,
            eps,
            {"effect": res.gamma},
            {"sdp_gap": res.solution.gap},
        )
    gamma = res.gamma
    target = currency(m)
    action = measurement_action(gamma)
    cov = covariance_check(action, sys.channel, target.system.channel)
    out_err = trace_distance(action(rho), target.state)
    return TaskReport(
        "yield",
        m,
        eps,
        {"effect": gamma, "currency_level": m, "channel": "binary measurement"},
        {
            "covariance": cov,
            "output_accuracy": out_err,
            "sdp_gap": res.solution.gap,
        },
    )


def one_shot_cost_exact(rho, sys: InstabilitySystem) -> TaskReport:
    """Exact (eps = 0) dilution cost D_max(rho || Delta(rho)) with witness."""
    ch = sys.channel
    delta_rho = herm(ch.apply(rho))
    m = d_max(rho, delta_rho)
    if m <= 1e-12:
        # Free state: the constant preparation works from any system.
        action = preparation_action(np.asarray(rho, dtype=complex), np.asarray(rho, dtype=complex))
        cov = covariance_check(action, currency(1.0).system.channel, ch)
        return TaskReport(
            "cost",
            0.0,
            0.0,
            {"channel": "constant preparation", "output": np.asarray(rho, dtype=complex)},
            {"covariance": cov},
        )
    other = herm((2.0**m * delta_rho - rho) / (2.0**m - 1.0))
    min_eig = float(np.linalg.eigvalsh(other)[0])
    action = preparation_action(np.asarray(rho, dtype=complex), other)
    cov = covariance_check(action, currency(m).system.channel, ch)
    return TaskReport(
        "cost",
        m,
        0.0,
        {
            "channel": "preparation",
            "currency_level": m,
            "output_on_zero": np.asarray(rho, dtype=complex),
            "output_on_one": other,
        },
        {"covariance": cov, "second_output_min_eig": min_eig},
    )


def one_shot_cost_eps(
    rho, sys: InstabilitySystem, eps: float, delta: float, **solver_kw
) -> TaskReport:
    """Certified interval for the eps-dilution cost.

    Lower bound: the smoothed max-relative entropy to the free set at eps.
    Upper bound: the best feasible candidate among the direct state, and
    mixtures tau = (1 - delta) omega + delta sigma with omega drawn from the
    (eps - delta)-ball (the smoothing optimizer and partial mixes toward it)
    and sigma a free state.  Every candidate is inside the eps-ball, so its
    D_max(tau || Delta(tau)) upper-bounds the true cost.
    """
    if not (0.0 < delta < eps):
        raise ValidationError("need 0 < delta < eps")
    ch = sys.channel
    rho = np.asarray(rho, dtype=complex)
    lower_res = dmax_smoothed_free(rho, ch, eps, **solver_kw)
    lower = lower_res.value

    candidates: list[np.ndarray] = [rho]
    inner = dmax_smoothed_free(rho, ch, eps - delta, **solver_kw)
    tau_m = herm(inner.tau)
    tau_m = _project_to_state(tau_m)
    tr_om = float(np.trace(inner.omega).real)
    if tr_om > 0:
        sigma_m = _project_to_state(inner.omega / tr_om)
        candidates.append(herm((1.0 - delta) * tau_m + delta * sigma_m))
        candidates.append(herm((1.0 - delta) * rho + delta * sigma_m))
    fixed = ch.fixed_state()
    candidates.append(herm((1.0 - delta) * rho + delta * fixed))

    upper = float("inf")
    best = rho
    for tau in candidates:
        if trace_distance(tau, rho) > eps + 1e-12:
            continue
        val = d_max(tau, herm(ch.apply(tau)))
        if val < upper:
            upper, best = val, tau
    upper = max(upper, lower)  # guard against solver noise crossing the bounds
    return TaskReport(
        "cost_interval",
        (lower, upper),
        eps,
        {"tau": best, "smoothed_tau": tau_m},
        {
            "sdp_gap": lower_res.solution.gap,
            "ball_distance": trace_distance(best, rho),
            "envelope": float(np.log2(1.0 / delta)),
        },
    )


def _project_to_state(m: np.ndarray) -> np.ndarray:
    """Clip tiny negative eigenvalues and renormalize the trace."""
    w, v = np.linalg.eigh(herm(m))
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total <= 0:
        raise ValidationError("cannot normalize a zero operator to a state")
    return herm((v * (w / total)) @ v.conj().T)


def battery_yield(rho, sys: InstabilitySystem, eps: float, **solver_kw) -> TaskReport:
    """Battery-assisted yield: equals the free hypothesis-testing divergence.

    Cross-checked against the one-extra-currency-bit protocol,
    yield(rho (x) phi_1) - 1, and witnessed by the composite effect built
    from the optimal free test.
    """
    ch = sys.channel
    res = ht_free(rho, ch, eps, **solver_kw)
    phi1 = currency(1.0)
    joint = tensor_compose(sys, phi1.system)
    joint_state = np.kron(np.asarray(rho, dtype=complex), phi1.state)
    protocol = restricted_ht(joint_state, joint.channel, eps, **solver_kw)
    identity_residual = abs(res.value - (protocol.value - 1.0))

    witness = {"effect": res.gamma}
    residuals = {
        "battery_identity": identity_residual,
        "sdp_gap": res.solution.gap,
    }
    if np.isfinite(res.value):
        upsilon = compose_effect(
            res.gamma, phi1.state, 1.0, ch, phi1.system.channel
        )
        dual = joint.channel.apply_dual(upsilon)
        level = -float(
            np.log2(max(float(np.trace(dual).real) / joint.dim, 1e-300))
        )
        residuals["composite_membership"] = spectral_norm(
            dual - 2.0**-level * np.eye(joint.dim)
        )
        residuals["composite_pass"] = float(
            np.real(np.trace(joint_state @ upsilon))
        )
        witness["composite_effect"] = upsilon
        witness["composite_level"] = level
    return TaskReport("battery_yield", res.value, eps, witness, residuals)


def catalytic_yield0(rho, sys: InstabilitySystem) -> TaskReport:
    """Zero-error catalytic yield; coincides with the battery-assisted one."""
    value = d_min_free(rho, sys.channel)
    return TaskReport("catalytic_yield0", value, 0.0, {}, {})


# ---------------------------------------------------------------------------
# Effect constructions
# ---------------------------------------------------------------------------


def lift_effect(gamma, channel: DestructionChannel) -> np.ndarray:
    """Lift an effect so its dual image becomes a scalar matrix.

    With p = ||Delta^*(Gamma)||_inf, the lifted effect
    (1-p) Gamma + p I - (1-p) Delta^*(Gamma) has Delta^* image p I and
    dominates (1-p) Gamma.
    """
    gamma = check_effect(gamma, channel.dim)
    dual = herm(channel.apply_dual(gamma))
    p = float(np.linalg.eigvalsh(dual)[-1])
    eye = np.eye(channel.dim)
    return herm((1.0 - p) * gamma + p * eye - (1.0 - p) * dual)


def compose_effect(
    gamma,
    lam,
    t: float,
    ch_a: DestructionChannel,
    ch_b: DestructionChannel,
) -> np.ndarray:
    """Combine an effect on A with a scalar-dual effect on B.

    Requires Delta_B^*(Lambda) = 2^-t I and 2^-(t+m) <= 1 - 2^-t where
    2^-m = ||Delta_A^*(Gamma)||_inf; the result lies in the scalar-dual
    class at level m + t and dominates Gamma (x) Lambda.
    """
    gamma = check_effect(gamma, ch_a.dim)
    lam = check_effect(lam, ch_b.dim)
    dual_b = herm(ch_b.apply_dual(lam))
    if spectral_norm(dual_b - 2.0**-t * np.eye(ch_b.dim)) > 1e-8:
        raise ValidationError("Lambda is not a scalar-dual effect at level t")
    dual_a = herm(ch_a.apply_dual(gamma))
    p = float(np.linalg.eigvalsh(dual_a)[-1])
    if p <= 0:
        raise ValidationError("Gamma has vanishing dual image")
    m = -float(np.log2(p))
    if 2.0 ** -(t + m) > 1.0 - 2.0**-t + 1e-12:
        raise ValidationError(f"hypothesis 2^-(t+m) <= 1 - 2^-t fails for t={t}, m={m}")
    eye_a = np.eye(ch_a.dim)
    eye_b = np.eye(ch_b.dim)
    bump = (2.0**-t / (1.0 - 2.0**-t)) * np.kron(p * eye_a - dual_a, eye_b - lam)
    return herm(np.kron(gamma, lam) + bump)


# ---------------------------------------------------------------------------
# Regularization sweep
# ---------------------------------------------------------------------------

YIELD_DIM_BUDGET = 64
COST_DIM_BUDGET = 256


def regularize_sweep(
    rho, sys: InstabilitySystem, eps: float, n_max: int, **solver_kw
) -> list[dict]:
    """Per-copy rates over n = 1..n_max tensor powers.

    yield_rate uses the restricted hypothesis-testing SDP (skipped above the
    dimension budget 64); cost_hi_rate is the exact-cost rate from the
    max-relative entropy (eigenvalue only, budget 256); cost_lo_rate is the
    smoothed lower bound (SDP budget).  The Umegaki rate is the common
    asymptotic target of both.
    """
    ch = sys.channel
    rho = np.asarray(rho, dtype=complex)
    target = umegaki_free(rho, ch).value
    rows = []
    rho_n = None
    sys_n = None
    for n in range(1, n_max + 1):
        rho_n = rho if n == 1 else np.kron(rho_n, rho)
        sys_n = sys if n == 1 else tensor_compose(sys_n, sys)
        dim_n = sys_n.dim
        row = {
            "n": n,
            "yield_rate": None,
            "cost_lo_rate": None,
            "cost_hi_rate": None,
            "umegaki": target,
        }
        if dim_n <= YIELD_DIM_BUDGET:
            row["yield_rate"] = restricted_ht(rho_n, sys_n.channel, eps, **solver_kw).value / n
            row["cost_lo_rate"] = (
                dmax_smoothed_free(rho_n, sys_n.channel, eps, **solver_kw).value / n
            )
        else:
            log.info("n=%d: dimension %d exceeds the SDP budget %d, yield rows skipped",
                     n, dim_n, YIELD_DIM_BUDGET)
        if dim_n <= COST_DIM_BUDGET:
            row["cost_hi_rate"] = d_max(rho_n, herm(sys_n.channel.apply(rho_n))) / n
        else:
            log.info("n=%d: dimension %d exceeds the exact-cost budget %d, row skipped",
                     n, dim_n, COST_DIM_BUDGET)
        rows.append(row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    lines = ["n,yield_rate,cost_lo_rate,cost_hi_rate,umegaki"]
    for row in rows:
        cells = [str(row["n"])]
        for key in ("yield_rate", "cost_lo_rate", "cost_hi_rate", "umegaki"):
            v = row[key]
            cells.append("" if v is None else f"{v:.12g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def sweep_diagnostics(rows: list[dict], tol: float = 1e-6) -> dict:
    """Monotone-trend checks on a regularization sweep.

    The exact-cost rate is additive, so its distance to the Umegaki target
    must be nonincreasing; yield rates stay below the target (one-sided);
    the smoothed lower-bound rate cannot exceed the exact-cost rate.
    """
    target = rows[0]["umegaki"] if rows else 0.0
    cost_gaps = [abs(r["cost_hi_rate"] - target) for r in rows if r["cost_hi_rate"] is not None]
    yields = [r["yield_rate"] for r in rows if r["yield_rate"] is not None]
    lo_ok = all(
        r["cost_lo_rate"] <= r["cost_hi_rate"] + tol
        for r in rows
        if r["cost_lo_rate"] is not None and r["cost_hi_rate"] is not None
    )
    return {
        "cost_gap_nonincreasing": all(
            cost_gaps[i + 1] <= cost_gaps[i] + tol for i in range(len(cost_gaps) - 1)
        ),
        "yield_below_target": all(v <= target + tol for v in yields),
        "lower_bound_consistent": lo_ok,
        "target": target,
    }
