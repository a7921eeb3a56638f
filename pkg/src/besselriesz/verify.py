"""Acceptance battery: every quantitative exit criterion as a callable check.

Each check pins its tolerance, computes the measured quantity, and reports a
CheckResult; the pytest acceptance module and the ``verify`` CLI pipeline both
consume this list so the criteria are runnable in either harness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .auxfn import AuxIndex, F, F_decomposed, derivative_bound_probe, f_zero
from .discretize import assemble, conjugate_weight, make_grid
from .kernels import (
    DirectF,
    IDX11,
    IDX20,
    IDX21,
    TabulatedF,
    commutator_kernel,
    gaussian_profile_kernel,
    invsqrt_kernel_closed,
    invsqrt_kernel_subordination,
    prop35_rhs_kernel,
    ratio_bound_check,
    riesz_kernel_bessel,
    spectral_kernel_inverse_radial,
)
from .quadrature import gauss_legendre_box
from .sobolev import directional_seminorm, sphere_rule
from .special import ModelParams, bessel_j, gamma, psi_lambda
from .spectra import singular_values, weak_quasinorm, weyl_fit
from .symbols import build_symbol, constant_symbol, gaussian_bump


@dataclass
class CheckResult:
    criterion: str
    passed: bool
    tolerance: str
    measured: dict
    seconds: float


def _result(name, t0, passed, tolerance, **measured) -> CheckResult:
    return CheckResult(
        criterion=name,
        passed=bool(passed),
        tolerance=tolerance,
        measured={k: _jsonable(v) for k, v in measured.items()},
        seconds=time.time() - t0,
    )


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def check_bessel_closed_form() -> CheckResult:
    """1: half-integer Bessel against its elementary closed form."""
    t0 = time.time()
    x = np.logspace(-2, 2, 100)
    closed = np.sqrt(2.0 / (np.pi * x)) * np.sin(x)
    rel = np.abs(bessel_j(0.5, x) - closed) / np.abs(closed)
    worst = float(rel.max())
    return _result(
        "1 half-integer Bessel closed form", t0,
        worst <= 1e-12, "rel <= 1e-12 on 100 log-spaced x in (0, 100]",
        max_rel_err=worst,
    )


def check_f_zero_limits() -> CheckResult:
    """2: zero limits of the F profiles and the Beta closed form for F20(0)."""
    t0 = time.time()
    worst_zero = 0.0
    worst_beta = 0.0
    confirmations = []
    for n in (1, 2):
        for lam in (0.5, 1.0, 1.5):
            p = ModelParams(n=n, lam=lam, k=1)
            worst_zero = max(
                worst_zero, abs(f_zero(IDX11, p)), abs(f_zero(IDX21, p))
            )
            closed = gamma(lam) * gamma(n / 2 + 1) / (2 * gamma(lam + n / 2 + 1))
            # confirm the closed form against the defining integral's limit
            seq = [abs(F(IDX20, p, x) - closed) for x in (1e-2, 1e-3, 1e-4)]
            confirmations.append(seq[0] > seq[1] > seq[2])
            worst_beta = max(worst_beta, abs(f_zero(IDX20, p) - closed) / closed)
    passed = worst_zero <= 1e-8 and worst_beta <= 1e-6 and all(confirmations)
    return _result(
        "2 zero limits of the F profiles", t0, passed,
        "|F11(0)|,|F21(0)| <= 1e-8; F20(0) vs Beta closed form rel <= 1e-6",
        max_abs_zero=worst_zero, max_beta_rel=worst_beta,
        limit_confirms_closed_form=all(confirmations),
    )


def check_decomposition() -> CheckResult:
    """3: three-part decomposition against direct quadrature."""
    t0 = time.time()
    worst = 0.0
    for n in (1, 2):
        for lam in (0.5, 1.0, 1.5):
            p = ModelParams(n=n, lam=lam, k=1)
            for kl in ((2, 0), (1, 1), (2, 1)):
                idx = AuxIndex(*kl)
                for x in (0.1, 0.5, 1.0):
                    worst = max(worst, abs(F(idx, p, x) - F_decomposed(idx, p, x)))
    return _result(
        "3 near-zero decomposition agreement", t0, worst <= 1e-8,
        "|F - F_decomposed| <= 1e-8 at x in {0.1, 0.5, 1}, all indices, 6 (n, lam)",
        max_abs_residual=worst,
    )


def check_derivative_envelope() -> CheckResult:
    """4: derivative envelope finite, decade sups non-increasing from the top."""
    t0 = time.time()
    xs = np.logspace(1, 3, 25)
    all_ok = True
    records = {}
    for lam in (0.5, 1.0):
        p = ModelParams(n=1, lam=lam, k=1)
        for kl in ((2, 0), (1, 1), (2, 1)):
            for j in (0, 1, 2):
                rep = derivative_bound_probe(AuxIndex(*kl), p, j, xs)
                sups = rep.decade_sups
                finite = bool(np.all(np.isfinite(sups)))
                # scanning decades from the largest x down, sups must not increase
                downward = sups[::-1]
                monotone = bool(np.all(np.diff(downward) <= 1e-9 * downward[:-1]))
                ok = finite and monotone and rep.bounded
                all_ok = all_ok and ok
                records[f"lam{lam}_F{kl[0]}{kl[1]}_j{j}"] = sups.tolist()
    return _result(
        "4 derivative envelope across decades", t0, all_ok,
        "per-decade sups of |F^(j)| x^(2+2lam+j-k) finite, non-increasing from the top decade",
        decade_sups=records,
    )


def check_three_way_kernels() -> CheckResult:
    """5: closed form / subordination / spectral representations agree."""
    t0 = time.time()
    rng = np.random.default_rng(5)
    worst = 0.0
    for lam in (0.5, 1.0, 1.5):
        p = ModelParams(n=1, lam=lam, k=1)
        pairs = 0
        while pairs < 20:
            x = np.array([rng.uniform(-1, 1), rng.uniform(0.5, 2.5)])
            y = np.array([rng.uniform(-1, 1), rng.uniform(0.5, 2.5)])
            separated = np.linalg.norm(x - y) >= 0.1 * min(x[-1], y[-1])
            if not separated or abs(x[0] - y[0]) < 0.3:
                continue
            pairs += 1
            a = invsqrt_kernel_closed(p, x, y)
            b = invsqrt_kernel_subordination(p, x, y)
            c = spectral_kernel_inverse_radial(p, x, y)
            worst = max(worst, max(abs(a - b), abs(a - c), abs(b - c)) / abs(a))
    return _result(
        "5 three-way inverse-sqrt kernel agreement", t0, worst <= 1e-3,
        "pairwise rel <= 1e-3 at 20 separated pairs, lam in {0.5, 1, 1.5}",
        max_pairwise_rel=worst,
    )


def check_ratio_bound() -> CheckResult:
    """6: height-ratio bound for pairs with H <= 1."""
    t0 = time.time()
    rep = ratio_bound_check(10**5, n=1, seed=6)
    return _result(
        "6 height-ratio bound under H <= 1", t0, rep.violations == 0,
        "zero violations of [(3-sqrt5)/2, (3+sqrt5)/2] over 1e5 accepted pairs",
        accepted=rep.accepted, violations=rep.violations,
        ratio_range=[rep.ratio_min, rep.ratio_max],
    )


def check_schur_identity() -> CheckResult:
    """7: commutator kernel equals the Schur-symbol assembly pointwise."""
    t0 = time.time()
    rng = np.random.default_rng(7)
    f = gaussian_bump([0.3, 1.2], 0.4)
    worst = 0.0
    for k in (1, 2):
        p = ModelParams(n=1, lam=1.0, k=k)
        f_eval = DirectF(p)
        base = lambda a, b: riesz_kernel_bessel(p, a, b, f_eval)
        pairs = 0
        while pairs < 1000:
            x = np.array([rng.uniform(-1, 1), rng.uniform(0.3, 3.0)])
            y = np.array([rng.uniform(-1, 1), rng.uniform(0.3, 3.0)])
            if np.linalg.norm(x - y) < 1e-6:
                continue
            pairs += 1
            lhs = commutator_kernel(base, f, x, y)
            rhs = prop35_rhs_kernel(p, f, x, y, f_eval)
            if lhs != 0.0:
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return _result(
        "7 Schur-assembly kernel identity", t0, worst <= 1e-10,
        "rel <= 1e-10 at 1e3 random pairs, k in {1, n+1}",
        max_rel=worst,
    )


def check_hilbert_schmidt_identity() -> CheckResult:
    """8: Frobenius norm of the assembled multiplier matrix vs the trace quadrature."""
    t0 = time.time()
    p = ModelParams(n=1, lam=1.0, k=1)
    f = gaussian_bump([0.0, 4.5], 0.5)

    def kern(x, y):
        return f(x) * gaussian_profile_kernel(p, x, y)

    xr = gauss_legendre_box([(-3.0, 3.0), (1.5, 7.5)], 60)
    ur = gauss_legendre_box([(0.0, 5.0)], 200)
    u = ur.nodes[:, 0]
    inner = np.array(
        [np.dot(ur.weights, np.exp(-2 * u * u) * psi_lambda(p.lam, x2 * u) ** 2)
         for x2 in xr.nodes[:, 1]]
    )
    trace = float(
        (0.5 / np.pi) * np.sqrt(np.pi / 2) * np.dot(xr.weights, f(xr.nodes) ** 2 * inner)
    )

    errs = []
    for m in (32, 64):
        grid = make_grid([(-7.0, 7.0), (0.1, 11.0)], (m, m), halfspace=True)
        A = assemble(kern, grid, "weighted", lam=p.lam, zero_diagonal=False)
        fro2 = float(np.sum(A.entries**2))
        errs.append(abs(fro2 - trace) / trace)
    passed = errs[0] <= 0.02 and errs[1] < errs[0]
    return _result(
        "8 Hilbert-Schmidt trace identity", t0, passed,
        "rel <= 2% at 32 points/dim and decreasing at 64",
        trace_quadrature=trace, rel_err_32=errs[0], rel_err_64=errs[1],
    )


def _default_commutator_spectrum(points: int):
    p = ModelParams(n=1, lam=1.0, k=2)
    grid = make_grid([(0.0, 1.0), (0.5, 1.5)], (points, points), halfspace=True)
    sym = build_symbol(
        {"kind": "cosine-bump", "center": [0.5, 1.0], "width": [0.43, 0.43], "amplitude": 1.0}
    )
    ftab = TabulatedF(p, 3.2)

    def kern(x, y):
        return commutator_kernel(lambda a, b: riesz_kernel_bessel(p, a, b, ftab), sym, x, y)

    A = assemble(kern, grid, "weighted", lam=p.lam)
    return grid, sym, singular_values(A)


def check_spectral_decay_stability() -> CheckResult:
    """9: weak quasinorm stable under grid doubling; constant symbol gives 0."""
    t0 = time.time()
    _, _, s32 = _default_commutator_spectrum(32)
    _, _, s64 = _default_commutator_spectrum(64)
    q32 = weak_quasinorm(s32, 2.0)
    q64 = weak_quasinorm(s64, 2.0)
    drift = abs(q64 - q32) / q32

    p = ModelParams(n=1, lam=1.0, k=2)
    grid = make_grid([(0.0, 1.0), (0.5, 1.5)], (16, 16), halfspace=True)
    ftab = TabulatedF(p, 3.2)
    const = constant_symbol(0.7)

    def kern(x, y):
        return commutator_kernel(lambda a, b: riesz_kernel_bessel(p, a, b, ftab), const, x, y)

    s_const = singular_values(assemble(kern, grid, "weighted", lam=p.lam))
    passed = drift <= 0.10 and float(s_const.max()) == 0.0
    return _result(
        "9 weak-quasinorm stability and constant cutoff", t0, passed,
        "quasinorm change <= 10% from 32^2 to 64^2; constant symbol spectrum == 0",
        quasinorm_32=q32, quasinorm_64=q64, drift=drift,
        constant_top_singular_value=float(s_const.max()),
    )


def check_weyl_law() -> CheckResult:
    """10: free-fit exponent near -1/2 and the two-symbol ratio test,
    both holding at the default grid and after one doubling."""
    t0 = time.time()
    p = ModelParams(n=1, lam=1.0, k=2)
    sym1 = build_symbol(
        {"kind": "cosine-bump", "center": [0.5, 1.0], "width": [0.43, 0.43], "amplitude": 1.0}
    )
    sym2 = build_symbol(
        {"kind": "cosine-bump", "center": [0.48, 0.97], "width": [0.36, 0.42], "amplitude": 0.75}
    )
    ftab = TabulatedF(p, 3.2)
    sphere = sphere_rule(1, 128)
    record = {}
    ok = True
    for label, m in (("base", 48), ("doubled", 96)):
        grid = make_grid([(0.0, 1.0), (0.5, 1.5)], (m, m), halfspace=True)

        def k1(x, y):
            return commutator_kernel(lambda a, b: riesz_kernel_bessel(p, a, b, ftab), sym1, x, y)

        def k2(x, y):
            return commutator_kernel(lambda a, b: riesz_kernel_bessel(p, a, b, ftab), sym2, x, y)

        fit1 = weyl_fit(singular_values(assemble(k1, grid, "weighted", lam=p.lam)), 2.0)
        fit2 = weyl_fit(singular_values(assemble(k2, grid, "weighted", lam=p.lam)), 2.0)
        sem1 = directional_seminorm(sym1, p.k, 2.0, grid, sphere)
        sem2 = directional_seminorm(sym2, p.k, 2.0, grid, sphere)
        coeff_ratio = fit1.pinned_coefficient / fit2.pinned_coefficient
        sem_ratio = sem1 / sem2
        deviation = abs(coeff_ratio - sem_ratio) / sem_ratio
        exp_ok = abs(fit1.exponent + 0.5) <= 0.1
        ratio_ok = deviation <= 0.15
        ok = ok and exp_ok and ratio_ok
        record[label] = {
            "exponent": fit1.exponent,
            "coefficient_ratio": coeff_ratio,
            "seminorm_ratio": sem_ratio,
            "ratio_deviation": deviation,
        }
    return _result(
        "10 power-law exponent and coefficient-ratio law", t0, ok,
        "free exponent within 0.1 of -1/2; ratio within 15%; both hold after doubling",
        **record,
    )


def check_conjugation_invariance() -> CheckResult:
    """11: weight conjugation preserves the full singular value list."""
    t0 = time.time()
    p = ModelParams(n=1, lam=1.0, k=2)
    grid = make_grid([(0.0, 1.0), (0.5, 1.5)], (24, 24), halfspace=True)
    sym = gaussian_bump([0.5, 1.0], 0.15)
    ftab = TabulatedF(p, 3.2)

    def kern(x, y):
        return commutator_kernel(lambda a, b: riesz_kernel_bessel(p, a, b, ftab), sym, x, y)

    A = assemble(kern, grid, "weighted", lam=p.lam)
    B = conjugate_weight(A, "to_unweighted")
    s_before = singular_values(A)
    s_after = singular_values(B)
    gap = float(np.max(np.abs(s_before - s_after)))
    scale = max(1.0, float(s_before[0]))
    return _result(
        "11 conjugation invariance of singular values", t0, gap <= 1e-12 * scale,
        "elementwise <= 1e-12 (relative to the top singular value)",
        max_abs_gap=gap, top_singular_value=float(s_before[0]),
    )


def check_determinism() -> CheckResult:
    """12: pipeline reruns produce byte-identical CSV output at any thread count."""
    import tempfile
    from pathlib import Path

    from . import cli

    t0 = time.time()
    cfg = cli.parse_config(
        {
            "pipeline": "spectrum",
            "box": {"bounds": [[0.0, 1.0], [0.5, 1.5]], "points_per_dim": [16, 16]},
            "symbol": {"kind": "cosine-bump", "center": [0.5, 1.0], "width": [0.35, 0.35]},
        }
    )
    blobs = []
    for threads in (1, 4):
        with tempfile.TemporaryDirectory() as tmp:
            cli.run(cfg, out_dir=tmp, threads=threads)
            blobs.append((Path(tmp) / "spectrum.csv").read_bytes())
    identical = blobs[0] == blobs[1]
    return _result(
        "12 byte-identical reruns across thread counts", t0, identical,
        "spectrum.csv bytes equal for threads in {1, 4}",
        bytes=len(blobs[0]), identical=identical,
    )


ALL_CHECKS = (
    check_bessel_closed_form,
    check_f_zero_limits,
    check_decomposition,
    check_derivative_envelope,
    check_three_way_kernels,
    check_ratio_bound,
    check_schur_identity,
    check_hilbert_schmidt_identity,
    check_spectral_decay_stability,
    check_weyl_law,
    check_conjugation_invariance,
    check_determinism,
)


def run_all(checks=None) -> list:
    return [fn() for fn in (checks or ALL_CHECKS)]
