"""Acceptance suite: one test per shipped guarantee, run at its stated
tolerance and time budget.  Each test prints a single
``[criterion NN] PASS``/``FAIL`` line on the real stdout so the verdicts
survive pytest's capture, then asserts."""

import math
import sys
import time

import numpy as np

from conftest import random_nonneg
from pqsp import (
    DensityMatrix,
    FactorizationPlan,
    Polynomial,
    chebyshev_coeff_1norm,
    chebyshev_coeff_bound,
    chebyshev_coefficient,
    chebyshev_parallel_terms,
    chebyshev_polynomial,
    constituent_norm_bounds,
    estimate_chebyshev,
    factorize_nonneg,
    find_phases,
    generalized_swap_expectation,
    parallel_qsp_run,
    partition_function,
    query_depth_report,
    realized_value,
    renyi_integer,
    renyi_noninteger,
    rescale_factors,
    split_constituents,
    sup_norm,
    verify_factorization,
    von_neumann,
)
from pqsp.estimate import CostModel, predict_cost

RHO_34 = DensityMatrix.diagonal([0.75, 0.25])
S6_EXACT = math.log(0.75 ** 6 + 0.25 ** 6) / (1 - 6)


def _report(n: int, ok: bool, detail: str, elapsed: float, budget: float, capsys):
    verdict = ok and elapsed < budget
    line = f"[criterion {n:02d}] {'PASS' if verdict else 'FAIL'} ({elapsed:.2f}s/{budget:.0f}s) {detail}"
    with capsys.disabled():
        print("\n" + line, flush=True)
    assert ok, f"criterion {n}: {detail}"
    assert elapsed < budget, f"criterion {n}: {elapsed:.2f}s over the {budget:.0f}s budget"


def _even_tail(rng, half_degree):
    p = random_nonneg(rng, half_degree)
    coeffs = [c if i % 2 == 0 else 0.0 for i, c in enumerate(p.coeffs)]
    tail = Polynomial(coeffs)
    if tail.degree % 2:
        tail = Polynomial(coeffs[: tail.degree])
    return tail


def _spectral_parallel(factors, rho):
    eigs = np.linalg.eigvalsh(rho.matrix)
    total = 0.0
    for lam in eigs:
        prod = float(lam) ** len(factors)
        for f in factors:
            prod *= abs(f(float(lam))) ** 2
        total += prod
    return total


def test_criterion_01_swap_identity(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for dim in (2, 4, 8):
        rho = DensityMatrix.random_seeded(dim, 100 + dim)
        eigs = np.linalg.eigvalsh(rho.matrix)
        for k in range(2, 6):
            got = generalized_swap_expectation([rho] * k).value
            worst = max(worst, abs(got - float(np.sum(eigs ** k))))
    _report(1, worst <= 1e-10, f"worst swap-vs-spectrum gap {worst:.2e}",
            time.perf_counter() - t0, 1.0, capsys)


def test_criterion_02_parallel_ground_truth(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for trial in range(100):
        k = 1 + trial % 4
        half = int(rng.integers((k + 1) // 2, 11))  # keeps degree >= k
        plan = rescale_factors(factorize_nonneg(random_nonneg(rng, half), k))
        rho = DensityMatrix.random_seeded(int(rng.integers(2, 7)), 7000 + trial)
        factors = list(plan.factors)
        got = parallel_qsp_run(factors, rho, mode="direct").value
        worst = max(worst, abs(got - _spectral_parallel(factors, rho)))
    _report(2, worst <= 1e-8, f"worst direct-vs-spectral gap {worst:.2e} over 100 plans",
            time.perf_counter() - t0, 10.0, capsys)


def test_criterion_03_mode_equivalence(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(203)
    worst = 0.0
    for trial in range(50):
        dim = 2 + trial % 3
        k = 2 + trial % 2
        plan = rescale_factors(
            factorize_nonneg(random_nonneg(rng, int(rng.integers(k, 2 * k + 1))), k)
        )
        rho = DensityMatrix.random_seeded(dim, 5000 + trial)
        factors = list(plan.factors)
        z_direct = parallel_qsp_run(factors, rho, mode="direct").value
        z_circuit = parallel_qsp_run(factors, rho, mode="circuit").value
        worst = max(worst, abs(z_direct - z_circuit))
    _report(3, worst <= 1e-8, f"worst direct-vs-circuit gap {worst:.2e} over 50 trials",
            time.perf_counter() - t0, 30.0, capsys)


def test_criterion_04_factorization_reconstruction(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(204)
    worst = 0.0
    cap_ok = True
    for _ in range(100):
        p = random_nonneg(rng, int(rng.integers(2, 16)))
        d = p.degree
        for k in range(1, d // 2 + 1):
            plan = factorize_nonneg(p, k)
            worst = max(worst, verify_factorization(plan, p))
            cap = math.ceil(d / (2 * k))
            cap_ok = cap_ok and all(f.degree <= cap for f in plan.factors)
    _report(4, worst <= 1e-6 and cap_ok,
            f"worst residual {worst:.2e}, degree caps {'held' if cap_ok else 'broken'}",
            time.perf_counter() - t0, 30.0, capsys)


def test_criterion_05_basis_product_decomposition(capsys):
    t0 = time.perf_counter()
    worked = chebyshev_parallel_terms(chebyshev_polynomial(6), 2, 8)
    exact_ok = worked.ctilde[6] == 2.0 and worked.ctilde[2] == -1.0
    rng = np.random.default_rng(205)
    xs = np.linspace(-1.0, 1.0, 500)
    worst = 0.0
    for trial in range(50):
        k = (2, 3, 4, 5)[trial % 4]
        tail = _even_tail(rng, int(rng.integers(1, 18)))
        terms = chebyshev_parallel_terms(tail, k, tail.degree + k)
        worst = max(worst, float(np.max(np.abs(terms(xs) - np.real(tail(xs))))))
    _report(5, exact_ok and worst <= 1e-9,
            f"worked coefficients {'exact' if exact_ok else 'off'}, "
            f"worst reconstruction gap {worst:.2e}",
            time.perf_counter() - t0, 10.0, capsys)


def test_criterion_06_coefficient_identities(capsys):
    t0 = time.perf_counter()
    # independent three-term recurrence for the even-order coefficient 1-norms
    seq = [1.0, 3.0]
    while len(seq) <= 15:
        seq.append(6.0 * seq[-1] - seq[-2])
    rel = max(abs(chebyshev_coeff_1norm(n) - seq[n]) / seq[n] for n in range(16))
    bound_ok = all(
        abs(chebyshev_coefficient(d, n)) <= chebyshev_coeff_bound(d, n)
        for d in range(1, 31)
        for n in range(d % 2, d + 1, 2)
    )
    _report(6, rel <= 1e-9 and bound_ok,
            f"1-norm recurrence gap {rel:.2e}, coefficient bounds "
            f"{'held' if bound_ok else 'broken'}",
            time.perf_counter() - t0, 1.0, capsys)


def test_criterion_07_constituent_bounds(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(207)
    held = True
    for _ in range(100):
        d = int(rng.integers(2, 21))
        p = Polynomial(rng.normal(size=d + 1))
        p = p * (1.0 / sup_norm(p))
        for k in range(1, d + 1):
            lo, hi = split_constituents(p, k)
            cert_lo, cert_hi = constituent_norm_bounds(d, k)
            m_lo = 0.0 if lo.is_zero() else sup_norm(lo)
            m_hi = 0.0 if hi.is_zero() else sup_norm(hi)
            held = held and m_lo <= cert_lo and m_hi <= cert_hi
    _report(7, held, f"certificates {'held' if held else 'broken'} over 100 polynomials",
            time.perf_counter() - t0, 60.0, capsys)


def test_criterion_08_phase_finding(capsys):
    t0 = time.perf_counter()
    targets = [Polynomial([0, 1])] + [chebyshev_polynomial(n) for n in range(2, 11)]
    rng = np.random.default_rng(208)
    for deg, start in ((5, 1), (6, 0), (7, 1)):
        coeffs = np.zeros(deg + 1)
        coeffs[start::2] = rng.normal(size=len(coeffs[start::2]))
        q = Polynomial(coeffs)
        targets.append(q * (0.9 / sup_norm(q)))
    worst = 0.0
    for target in targets:
        found = find_phases(target)
        d = target.degree
        nodes = np.cos((np.arange(4 * (d + 1)) + 0.5) * math.pi / (4 * (d + 1)))
        err = max(
            abs(realized_value(found, float(x)) - float(np.real(target(float(x)))))
            for x in nodes
        )
        worst = max(worst, err)
    _report(8, worst <= 1e-4, f"worst node-grid reconstruction error {worst:.2e}",
            time.perf_counter() - t0, 120.0, capsys)


def test_criterion_09_statistical_convergence(capsys):
    t0 = time.perf_counter()
    gap = abs(renyi_integer(RHO_34, 6, 2).value - S6_EXACT)
    shots = predict_cost(
        CostModel(epsilon=0.05, s_alpha=0.75 ** 6 + 0.25 ** 6, alpha=6.0), "theorem7"
    )
    hits = sum(
        abs(renyi_integer(RHO_34, 6, 2, mode="sampled", shots=shots, seed=900 + i).value
            - S6_EXACT) <= 0.05
        for i in range(200)
    )
    normalized = {}
    for level in (10 ** 3, 10 ** 4, 10 ** 5):
        errs = [
            renyi_integer(RHO_34, 6, 2, mode="sampled", shots=level,
                          seed=77 * level + rep).std_error
            for rep in range(12)
        ]
        normalized[level] = float(np.mean(errs)) * math.sqrt(level)
    levels = sorted(normalized)
    scaling_ok = all(
        0.7 <= normalized[a] / normalized[b] <= 1.4
        for i, a in enumerate(levels)
        for b in levels[i + 1:]
    )
    ok = gap <= 1e-9 and hits >= 180 and scaling_ok
    _report(9, ok,
            f"exact gap {gap:.1e}, {hits}/200 within 0.05 at {shots} shots, "
            f"inverse-sqrt scaling {'held' if scaling_ok else 'broken'}",
            time.perf_counter() - t0, 300.0, capsys)


def test_criterion_10_depth_accounting(capsys):
    t0 = time.perf_counter()
    rows = []

    # generic two-sequence accounting: indefinite parity doubles the degree
    for degs in ((2,), (3,), (5,), (2, 4), (3, 3), (1, 6), (4, 2, 5), (7,)):
        factors = [Polynomial([1.0] * (dg + 1)) for dg in degs]
        depth, width = query_depth_report(factors)
        rows.append(depth == 2 * max(degs) and width == len(degs))

    # factor degree caps
    rng = np.random.default_rng(210)
    for half, k in ((3, 1), (4, 2), (6, 2), (8, 3), (10, 2), (12, 4), (15, 5), (9, 3)):
        p = random_nonneg(rng, half)
        plan = factorize_nonneg(p, k)
        cap = math.ceil(p.degree / (2 * k))
        rows.append(max(f.degree for f in plan.factors) <= cap)

    # parity-matched basis-product depth
    for d, k in ((8, 2), (10, 2), (12, 2), (16, 2), (12, 4), (16, 4), (9, 3), (15, 3)):
        got = estimate_chebyshev(chebyshev_polynomial(d), RHO_34, k).query_depth
        rows.append(got == (d - k) // (2 * k) + k - 1)

    # monomial-thread depth for integer entropies
    for alpha, k in ((6, 2), (7, 2), (8, 2), (6, 3), (9, 3), (12, 4)):
        got = renyi_integer(RHO_34, alpha, k).query_depth
        rows.append(got == ((alpha - k) // 2) // k + 1)

    assert len(rows) == 30
    bad = sum(1 for r in rows if not r)
    _report(10, all(rows), f"{30 - bad}/30 table rows match the closed forms",
            time.perf_counter() - t0, 1.0, capsys)


def test_criterion_11_applications_end_to_end(capsys):
    t0 = time.perf_counter()
    vn = von_neumann(DensityMatrix.maximally_mixed(2), 2, epsilon=0.05)
    vn_ok = (abs(vn.value - math.log(2.0)) <= 0.05
             and vn.breakdown["approximant_error"] <= vn.breakdown["eps_prime"])

    part = partition_function(RHO_34, 1.0, 2, epsilon=1e-3)
    z_exact = math.exp(-0.75) + math.exp(-0.25)
    part_ok = (abs(part.value - z_exact) <= 1e-3
               and part.breakdown["remainder_bound"] <= 1e-3 / 4.0
               and part.breakdown["one_norm"] <= part.breakdown["one_norm_certificate"])

    ren = renyi_noninteger(RHO_34, 0.5, 2, epsilon=0.05)
    s_half = math.log(math.sqrt(0.75) + math.sqrt(0.25)) / 0.5
    ren_ok = (abs(ren.value - s_half) <= 0.05
              and ren.breakdown["approximant_error"] <= ren.breakdown["eps_prime"])

    detail = (f"von Neumann gap {abs(vn.value - math.log(2.0)):.1e}, "
              f"partition gap {abs(part.value - z_exact):.1e}, "
              f"half-order gap {abs(ren.value - s_half):.1e}, certificates "
              f"{'held' if vn_ok and part_ok and ren_ok else 'broken'}")
    _report(11, vn_ok and part_ok and ren_ok, detail, time.perf_counter() - t0, 120.0, capsys)


def test_criterion_12_constant_bookkeeping(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(212)
    worst = 0.0
    exact_scaling = True
    for half, k in ((3, 2), (4, 3), (5, 2)):
        base = rescale_factors(factorize_nonneg(random_nonneg(rng, half), k))
        rho = DensityMatrix.random_seeded(3, 300 + k)

        doubled_factors = tuple(f * 2.0 for f in base.factors)
        doubled_norms = tuple(sup_norm(f) for f in doubled_factors)
        doubled = FactorizationPlan(
            factors=doubled_factors,
            factor_norms=doubled_norms,
            factorization_constant=float(np.prod(doubled_norms)),
            k=base.k,
            source_degree=base.source_degree,
            stored_constant=base.stored_constant,
        )

        ref = rescale_factors(base)
        renorm = rescale_factors(doubled)
        z_ref = parallel_qsp_run(list(ref.factors), rho).value
        z_new = parallel_qsp_run(list(renorm.factors), rho).value
        k_ref = ref.stored_constant * ref.factorization_constant
        k_new = renorm.stored_constant * renorm.factorization_constant

        worst = max(worst, abs(z_new - z_ref))
        exact_scaling = exact_scaling and k_new == 2.0 ** k * k_ref
    _report(12, worst <= 1e-10 and exact_scaling,
            f"worst estimate drift {worst:.1e}, K scaling "
            f"{'exact' if exact_scaling else 'inexact'}",
            time.perf_counter() - t0, 1.0, capsys)
