"""Seeded property-verification suites exposed through the CLI.

Each check draws its own instances from the given seed, verifies one of the
library's documented invariants, and reports a pass/fail with the measured
worst residual.  These are smaller, faster cousins of the pytest suites,
meant for quick field verification of an installation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from . import divergences as dv
from . import optimize as op
from . import tasks as tk
from .linalg import herm, mat_pow, schatten_norm, trace_norm
from .sampling import (
    random_density,
    random_effect,
    random_full_rank_density,
    random_hermitian,
    rng_from,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float


def _random_channel(d: int, rng) -> ch.DestructionChannel:
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return ch.dephaser(d)
    if kind == 1:
        return ch.replacer(random_full_rank_density(d, rng, 0.3))
    if d >= 3:
        return ch.tpce([(1, d - 1), (1, 1)])
    return ch.cond_depolarizer(1, d) if d == 2 else ch.dephaser(d)


def check_eigh_reconstruction(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 17))
        h = random_hermitian(d, rng)
        w, v = np.linalg.eigh(h)
        scale = max(np.abs(w).max(), 1e-300)
        worst = max(
            worst,
            np.abs((v * w) @ v.conj().T - h).max() / (d * scale),
            np.abs(v.conj().T @ v - np.eye(d)).max() / d,
        )
    return CheckResult("eigh reconstruction/unitarity", worst <= 1e-10, worst, 1e-10)


def check_mat_pow_semigroup(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        p = random_full_rank_density(d, rng, 0.1)
        a, b = rng.uniform(0.1, 1.5, size=2)
        lhs = mat_pow(p, a + b)
        rhs = mat_pow(p, a) @ mat_pow(p, b)
        worst = max(worst, np.abs(lhs - rhs).max())
    return CheckResult("mat_pow semigroup", worst <= 1e-9, worst, 1e-9)


def check_schatten_monotonicity(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        x = random_hermitian(d, rng)
        n1, n2, ninf = (schatten_norm(x, p) for p in (1.0, 2.0, np.inf))
        worst = max(worst, n2 - n1, ninf - n2)
    return CheckResult("Schatten order monotonicity", worst <= 1e-12, worst, 1e-12)


def check_channel_idempotence(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 6))
        c = _random_channel(d, rng)
        for e in tk.matrix_units(d):
            worst = max(worst, trace_norm(c.apply(c.apply(e)) - c.apply(e)))
    return CheckResult("destruction idempotence", worst <= 1e-10, worst, 1e-10)


def check_bimodularity(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 6))
        c = _random_channel(d, rng)
        y = random_hermitian(d, rng)
        x1 = c.apply_dual(random_hermitian(d, rng))
        x2 = c.apply_dual(random_hermitian(d, rng))
        worst = max(
            worst, trace_norm(c.apply_dual(x1 @ y @ x2) - x1 @ c.apply_dual(y) @ x2)
        )
    return CheckResult("dual bimodularity", worst <= 1e-9, worst, 1e-9)


def check_twist_identities(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 6))
        c = _random_channel(d, rng)
        for e in tk.matrix_units(d):
            worst = max(
                worst,
                trace_norm(c.twist(c.apply_tp_expectation(e), 1.0) - c.apply(e)),
                trace_norm(
                    c.apply_dual(e) - c.apply_tp_expectation(c.twist(e, 1.0))
                ),
            )
    return CheckResult("twist identities", worst <= 1e-9, worst, 1e-9)


def check_dual_choi_psd(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(10):
        d = int(rng.integers(2, 6))
        c = _random_channel(d, rng)
        worst = max(worst, -float(np.linalg.eigvalsh(herm(c.choi(dual=True)))[0]))
    return CheckResult("dual complete positivity (Choi)", worst <= 1e-9, worst, 1e-9)


def check_dpi(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = -np.inf
    for _ in range(100):
        d = int(rng.integers(2, 5))
        c = _random_channel(d, rng)
        rho = random_full_rank_density(d, rng)
        sig = random_full_rank_density(d, rng)
        pairs = [
            dv.umegaki,
            dv.d_min,
            dv.d_max,
            lambda a, b: dv.d_alpha_z(a, b, alpha=0.5, z=1.0),
            lambda a, b: dv.d_alpha_z(a, b, alpha=1.5, z=1.5),
            lambda a, b: dv.d_hypothesis(a, b, 0.1),
        ]
        for f in pairs:
            worst = max(worst, f(c.apply(rho), c.apply(sig)) - f(rho, sig))
    return CheckResult("data processing under destruction", worst <= 1e-8, worst, 1e-8)


def check_divergence_ordering(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = -np.inf
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_full_rank_density(d, rng)
        sig = random_full_rank_density(d, rng)
        a, b, c = dv.d_min(rho, sig), dv.umegaki(rho, sig), dv.d_max(rho, sig)
        worst = max(worst, a - b, b - c)
    return CheckResult("d_min <= umegaki <= d_max", worst <= 1e-8, worst, 1e-8)


def check_divergence_additivity(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(40):
        r1, r2 = random_full_rank_density(2, rng), random_full_rank_density(2, rng)
        s1, s2 = random_full_rank_density(2, rng), random_full_rank_density(2, rng)
        for f in (
            dv.umegaki,
            dv.d_min,
            dv.d_max,
            lambda a, b: dv.d_alpha_z(a, b, alpha=0.6, z=0.8),
        ):
            worst = max(
                worst,
                abs(f(np.kron(r1, r2), np.kron(s1, s2)) - f(r1, s1) - f(r2, s2)),
            )
    return CheckResult("divergence additivity", worst <= 1e-8, worst, 1e-8)


def check_fixed_point_vs_closed_form(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(10):
        d = int(rng.integers(2, 5))
        c = _random_channel(d, rng)
        rho = random_full_rank_density(d, rng)
        for alpha in (0.5, 1.3):
            cf = op.petz_free(rho, alpha, c)
            spec = op.TraceFunctionalSpec(mat_pow(rho, alpha), 1 - alpha, 1.0, c)
            fp = op.optimize_trace_functional(spec, method="fixed_point")
            worst = max(
                worst, abs(np.log2(fp.value) / (alpha - 1) - cf.value), fp.residual
            )
    return CheckResult("closed form vs fixed point", worst <= 1e-8, worst, 1e-8)


def check_monotone_sandwich(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = -np.inf
    for _ in range(30):
        d = int(rng.integers(2, 4))
        c = _random_channel(d, rng)
        rho = random_density(d, rng)
        low = op.d_min_free(rho, c)
        high = dv.d_max(rho, herm(c.apply(rho)))
        for m in (
            op.umegaki_free(rho, c).value,
            op.petz_free(rho, 0.5, c).value,
            op.m_lambda(rho, 1.5, 1.2, 0.5, c).value,
        ):
            worst = max(worst, low - m, m - high)
    return CheckResult("extremal monotone sandwich", worst <= 1e-8, worst, 1e-8)


def check_effect_constructions(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    lam0 = ch.basis_state(2, 0)
    dep2 = ch.depolarizer(2)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        c = _random_channel(d, rng)
        g = random_effect(d, rng)
        gp = tk.lift_effect(g, c)
        p = float(np.linalg.eigvalsh(herm(c.apply_dual(g)))[-1])
        worst = max(
            worst,
            np.abs(c.apply_dual(gp) - p * np.eye(d)).max(),
            -min(0.0, float(np.linalg.eigvalsh(gp - (1 - p) * g)[0])),
        )
        ups = tk.compose_effect(g, lam0, 1.0, c, dep2)
        cc = ch.tensor_channels(c, dep2)
        m = -np.log2(p)
        worst = max(
            worst,
            np.abs(cc.apply_dual(ups) - 2.0 ** -(m + 1) * np.eye(2 * d)).max(),
            -min(0.0, float(np.linalg.eigvalsh(ups - np.kron(g, lam0))[0])),
        )
    return CheckResult("effect lifting/composition", worst <= 1e-9, worst, 1e-9)


def check_task_consistency(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(5):
        d = int(rng.integers(2, 4))
        c = _random_channel(d, rng)
        s = ch.system(c)
        rho = random_density(d, rng)
        y0 = tk.one_shot_yield(rho, s, 0.0)
        cost0 = tk.one_shot_cost_exact(rho, s)
        dmin = op.d_min_free(rho, c)
        umeg = op.umegaki_free(rho, c).value
        yv = y0.value if np.isfinite(y0.value) else 0.0
        worst = max(worst, yv - dmin, dmin - umeg, umeg - cost0.value)
        bat = tk.battery_yield(rho, s, 0.1)
        worst = max(worst, bat.residuals["battery_identity"], yv - bat.value)
    return CheckResult("operational ordering and battery identity", worst <= 1e-6, worst, 1e-6)


def check_covariance_suite(seed) -> CheckResult:
    rng = rng_from(seed)
    worst = 0.0
    for _ in range(10):
        d = int(rng.integers(2, 4))
        c = _random_channel(d, rng)
        u = ch.random_free_unitary(c, rng)
        worst = max(
            worst, tk.covariance_check(lambda e: u @ e @ u.conj().T, c, c)
        )
        worst = max(worst, tk.covariance_check(c.apply, c, c))
        gamma = random_full_rank_density(d, rng, 0.3)
        rep = ch.replacer(gamma)
        worst = max(
            worst,
            tk.covariance_check(lambda e: np.trace(e) * gamma, c, rep),
        )
    return CheckResult("covariant channel generators", worst <= 1e-9, worst, 1e-9)


ALL_CHECKS: dict[str, Callable] = {
    "linalg": check_eigh_reconstruction,
    "mat_pow": check_mat_pow_semigroup,
    "schatten": check_schatten_monotonicity,
    "idempotence": check_channel_idempotence,
    "bimodularity": check_bimodularity,
    "twist": check_twist_identities,
    "choi": check_dual_choi_psd,
    "dpi": check_dpi,
    "ordering": check_divergence_ordering,
    "additivity": check_divergence_additivity,
    "fixed_point": check_fixed_point_vs_closed_form,
    "sandwich": check_monotone_sandwich,
    "effects": check_effect_constructions,
    "tasks": check_task_consistency,
    "covariance": check_covariance_suite,
}


def _run_one(payload) -> CheckResult:
    name, seed = payload
    return ALL_CHECKS[name](seed)


def run_checks(seed: int, names=None, workers: int = 1) -> list[CheckResult]:
    selected = list(ALL_CHECKS) if not names else list(names)
    for name in selected:
        if name not in ALL_CHECKS:
            raise KeyError(name)
    payloads = [(name, seed + 1000 * i) for i, name in enumerate(selected)]
    if workers > 1 and len(payloads) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, payloads))
    return [_run_one(p) for p in payloads]
