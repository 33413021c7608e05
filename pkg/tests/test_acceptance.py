"""Acceptance criteria 1-10; each test records one PASS/FAIL line in the terminal summary."""

import numpy as np
import sympy as sp

from holonomy_lab.algebra import (
    RotationPath,
    anti_self_dual_part,
    commutator,
    index_hodge,
    left_basis,
    project_left,
    project_right,
    right_basis,
    self_dual_part,
    so4_pairing,
)
from holonomy_lab.gauge import (
    AbelianConstantField,
    AxisGaugeTransform,
    PerturbedField,
    bpst,
    curvature,
    gauge_transform,
    self_dual_ratio,
    ym_residual,
)
from holonomy_lab.geometry import (
    ConstantCurve,
    DirectionField,
    LineCurve,
    PiecewiseLinearReparametrization,
    PolyProfile,
    PowerReparametrization,
    SineProfile,
    SplineCurve,
    reparametrize,
)
from holonomy_lab.levy import (
    CoordinateFunction,
    PathSample,
    SquaredNorm,
    diagnostic_J,
    integral_functional_laplacian,
    laplacian_closed_form,
    laplacian_kernel_route,
    pointwise_trace_recovery,
)
from holonomy_lab.transport import (
    TransportOptions,
    fd_directional_derivative,
    first_derivative,
    parallel_transport,
    reparametrize_check,
    second_derivative_form,
    transport_between,
)

from conftest import CHARTS, LEFT, PINNED_CURVES, RIGHT, WITNESS, record

FLAT, S4 = CHARTS["flat"], CHARTS["s4"]
CIRCLE = PINNED_CURVES["circle"]


def fro(a, axes):
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=axes))


def random_direction(rng, terms=3):
    profiles = [SineProfile(1), SineProfile(2), SineProfile(3), PolyProfile(0), PolyProfile(1)]
    picks = rng.choice(len(profiles), size=terms, replace=False)
    return DirectionField([(profiles[i], rng.normal(size=4)) for i in picks])


def test_criterion_01_self_duality(instanton, rng):
    x = rng.normal(size=(50, 4))
    flat = float(np.max(self_dual_ratio(instanton, FLAT, x)[0]))
    s4 = float(np.max(self_dual_ratio(instanton, S4, x)[0]))
    ok = flat < 1e-10 and s4 < 1e-8
    record(1, ok, f"max |F+|/|F| flat {flat:.1e} (<1e-10), S4 {s4:.1e} (<1e-8)")
    assert ok


def test_criterion_02_yang_mills_residual(instanton, rng):
    x = rng.normal(size=(20, 4))
    fmax = float(np.max(fro(curvature(instanton, x), (-4, -3, -2, -1))))
    worst = {name: float(np.max(fro(ym_residual(instanton, chart, x), (-3, -2, -1)))) / fmax for name, chart in CHARTS.items()}
    ok = all(v < 1e-9 for v in worst.values())
    record(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (<1e-9 max|F|)")
    assert ok


def test_criterion_03_forward_direction(instanton_samples):
    worst = 0.0
    for s in instanton_samples.values():
        for W in LEFT:
            for route in (laplacian_closed_form, laplacian_kernel_route):
                worst = max(worst, route(None, s.chart, None, W, sample=s).norm / s.scale())
    ok = worst <= 1e-6
    record(3, ok, f"left-basis Laplacian on 5 curves x 2 charts x 2 routes, max rel {worst:.1e} (<=1e-6)")
    assert ok


def test_criterion_04_converse(instanton_samples):
    chart_name, curve_name, index = WITNESS
    s = instanton_samples[(chart_name, curve_name)]
    witness = laplacian_closed_form(None, s.chart, None, RIGHT[index], sample=s).norm / s.scale()
    opts = TransportOptions(n=1000)
    norms = []
    for eps in (0.0, 0.05, 0.1, 0.2):
        A = PerturbedField(bpst(), eps) if eps else bpst()
        norms.append(laplacian_closed_form(A, FLAT, CIRCLE, LEFT[0], opts).norm)
    monotone = bool(np.all(np.diff(norms) > 0))
    ok = witness >= 1e-2 and monotone and norms[0] < 1e-8
    record(4, ok, f"witness rel {witness:.2e} (>=1e-2); e1 norm vs eps " + ", ".join(f"{n:.2e}" for n in norms))
    assert ok


def test_criterion_05_route_equivalence():
    rng = np.random.default_rng(5)
    c = left_basis()[0] * 0.4 + right_basis()[2] * 0.3
    zoo = [
        bpst(),
        bpst(0.7, (0.2, 0.0, -0.1, 0.3), "dual"),
        PerturbedField(bpst(), 0.3),
        AbelianConstantField(c, N=2),
    ]
    worst = 0.0
    for k in range(10):
        A = zoo[k % len(zoo)]
        chart = (FLAT, S4)[k % 2]
        curve = SplineCurve(rng.uniform(-0.8, 0.8, size=(4, 4)))
        W = RotationPath.from_coefficients(rng.normal(size=3), rng.normal(size=3))
        s = PathSample(A, chart, curve, TransportOptions(n=1000))
        a = laplacian_closed_form(None, chart, None, W, sample=s)
        b = laplacian_kernel_route(None, chart, None, W, sample=s)
        worst = max(worst, np.linalg.norm(a.value - b.value) / max(1.0, a.norm))
    ok = worst <= 1e-6
    record(5, ok, f"closed form vs kernel trace on 10 random triples, max {worst:.1e} (<=1e-6)")
    assert ok


def test_criterion_06_derivatives_vs_fd(rng):
    opts = TransportOptions(n=1000)
    fields = [bpst(), bpst(0.6, (0.1, 0, 0.2, 0), "dual"), PerturbedField(bpst(), 0.3)]
    first = 0.0
    for k in range(10):
        curve = SplineCurve(rng.uniform(-0.8, 0.8, size=(4, 4)))
        h = random_direction(rng)
        analytic = first_derivative(fields[k % 3], FLAT, curve, h, opts)
        fd, _ = fd_directional_derivative(fields[k % 3], curve, h, options=opts)
        first = max(first, np.linalg.norm(analytic - fd) / np.linalg.norm(fd))
    opts = TransportOptions(n=400)
    A = PerturbedField(bpst(), 0.2)
    second_ok, second, rel2 = True, 0.0, 0.0
    for _ in range(10):
        h1, h2 = random_direction(rng, 2), random_direction(rng, 2)
        analytic = second_derivative_form(A, CIRCLE, h1, h2, opts)
        fd, resid = fd_directional_derivative(A, CIRCLE, h1, order=2, h2=h2, options=opts)
        err = np.linalg.norm(analytic - fd)
        second = max(second, err / (10 * resid + 1e-9 * np.linalg.norm(fd)))
        rel2 = max(rel2, err / np.linalg.norm(fd))
        second_ok &= bool(err <= 10 * resid + 1e-9 * np.linalg.norm(fd))
    ok = first < 1e-5 and second_ok
    record(6, ok, f"first derivative rel {first:.1e} (<1e-5); second derivative rel {rel2:.1e}, error / noise bound {second:.1e} (<=1)")
    assert ok


def test_criterion_07_transport_axioms(instanton, rng):
    opts = TransportOptions()
    res = parallel_transport(instanton, CIRCLE, opts)
    errs = {"unitarity": res.unitarity_defect()}
    mult = 0.0
    for r, s, t in [(0.0, 0.3, 0.9), (0.1, 0.5, 1.0)]:
        lhs = transport_between(instanton, CIRCLE, r, t, opts)
        rhs = transport_between(instanton, CIRCLE, s, t, opts) @ transport_between(instanton, CIRCLE, r, s, opts)
        mult = max(mult, np.linalg.norm(lhs - rhs))
    errs["multiplicativity"] = mult
    errs["identity"] = np.linalg.norm(parallel_transport(instanton, ConstantCurve((0.3, 0, 0, 0)), opts).endpoint - np.eye(2))
    paused = reparametrize(CIRCLE, PiecewiseLinearReparametrization([0.0, 0.3, 0.6, 1.0], [0.0, 0.5, 0.5, 1.0]))
    errs["constant_segment"] = np.linalg.norm(transport_between(instanton, paused, 0.3, 0.6, opts) - np.eye(2))
    sigmas = [PowerReparametrization(2.0), PiecewiseLinearReparametrization([0.0, 0.5, 1.0], [0.0, 0.2, 1.0])]
    errs["reparametrization"] = max(reparametrize_check(instanton, CIRCLE, sg)["discrepancy"] for sg in sigmas)
    psi = AxisGaugeTransform.random(rng, factors=3)
    Ut = parallel_transport(gauge_transform(instanton, psi), CIRCLE, opts).endpoint
    p0, p1 = psi(CIRCLE.position(0.0)), psi(CIRCLE.position(1.0))
    errs["gauge"] = np.linalg.norm(Ut - p1.conj().T @ res.endpoint @ p0)
    ref = parallel_transport(instanton, CIRCLE, TransportOptions(n=1600)).endpoint
    e = [np.linalg.norm(parallel_transport(instanton, CIRCLE, TransportOptions(n=n, drift_tol=1.0)).endpoint - ref) for n in (40, 80, 160)]
    ratios = [e[0] / e[1], e[1] / e[2]]
    ok = max(errs.values()) < 1e-8 and all(12 <= r <= 20 for r in ratios)
    record(7, ok, f"max axiom defect {max(errs.values()):.1e} (<1e-8); RK4 ratios {ratios[0]:.2f}, {ratios[1]:.2f} (in [12, 20])")
    assert ok


def test_criterion_08_integral_functional():
    flat = integral_functional_laplacian(SquaredNorm(), FLAT, SplineCurve(np.eye(4)))
    x = sp.symbols("x1:5", real=True)
    phi2 = 4 / (1 + sum(xi**2 for xi in x)) ** 2
    lb = sum(sp.diff(phi2 * sp.diff(x[0], xi), xi) for xi in x) / phi2**2
    point = (0.5, 0.0, 0.0, 0.0)
    oracle = float(lb.subs(dict(zip(x, point))))
    s4 = integral_functional_laplacian(CoordinateFunction(0), S4, ConstantCurve(point))
    loop = integral_functional_laplacian(SquaredNorm((0.1, 0.2, 0, 0)), S4, CIRCLE)
    ok = (
        abs(flat["direct"] - 8.0) < 1e-10
        and abs(flat["kernel"] - 8.0) < 1e-10
        and abs(oracle + 0.625) < 1e-14
        and abs(s4["kernel"] - oracle) < 1e-8
        and abs(s4["direct"] - oracle) < 1e-8
        and loop["discrepancy"] < 1e-8
    )
    record(8, ok, f"|x|^2 flat {flat['kernel']:.12f}; S4 x1 kernel {s4['kernel']:.10f} vs symbolic {oracle}; loop discrepancy {loop['discrepancy']:.1e}")
    assert ok


def test_criterion_09_lemma_diagnostics(instanton):
    opts = TransportOptions(n=1000)
    j_zero = max(
        float(np.max(d["J_norms"]) / d["scale"])
        for d in (diagnostic_J(instanton, FLAT, CIRCLE, W, [0.25, 0.5, 0.75, 1.0], opts) for W in LEFT[:2])
    )
    perturbed = PerturbedField(bpst(), 0.2)
    jprime = max(diagnostic_J(perturbed, FLAT, CIRCLE, W, [1.0], opts)["relative_residual"] for W in (LEFT[0], RIGHT[2]))
    rate = pointwise_trace_recovery(instanton, FLAT, CIRCLE, right_basis()[1], 0.6, options=opts)["rate_exponent"]
    c0 = 0.7
    abelian = AbelianConstantField(left_basis()[0] * c0, N=1)
    line = LineCurve((0, 0, 0, 0), (1, 0, 0, 0))
    rec = pointwise_trace_recovery(abelian, FLAT, line, left_basis()[0], 0.6, options=TransportOptions(n=400))
    value = complex(rec["limit"][0, 0])
    ok = j_zero <= 1e-6 and jprime < 5e-3 and 0.8 <= rate <= 1.2 and abs(value - 8j * c0) < 1e-4
    record(9, ok, f"J rel {j_zero:.1e} (<=1e-6); J'(1) rel {jprime:.1e} (<5e-3); rate {rate:.3f} (in [0.8, 1.2]); abelian limit {value:.6f} vs {8j * c0}")
    assert ok


def test_criterion_10_algebra_identities(rng):
    L = [e.matrix for e in left_basis()]
    R = [f.matrix for f in right_basis()]
    defects = []
    for _ in range(20):
        m = rng.normal(size=(4, 4))
        a = m - m.T
        defects.append(np.max(np.abs(index_hodge(index_hodge(a)) - a)))
        pl, pr = project_left(a).matrix, project_right(a).matrix
        defects.append(np.max(np.abs(pl + pr - a)))
        defects.append(np.max(np.abs(project_left(pl).matrix - pl)))
        defects.append(np.max(np.abs(project_left(pr).matrix)))
        B = rng.normal(size=(4, 4, 2, 2)) + 1j * rng.normal(size=(4, 4, 2, 2))
        B = B - np.swapaxes(B, 0, 1)
        defects += [np.max(np.abs(so4_pairing(e, anti_self_dual_part(B)))) for e in left_basis()]
        defects += [np.max(np.abs(so4_pairing(f, self_dual_part(B)))) for f in right_basis()]
    for a in L:
        defects.append(np.max(np.abs(index_hodge(a) - a)))
        defects += [np.max(np.abs(commutator(a, b))) for b in R]
        defects += [np.max(np.abs(project_right(commutator(a, b)).matrix)) for b in L]
    for b in R:
        defects.append(np.max(np.abs(index_hodge(b) + b)))
        defects += [np.max(np.abs(project_left(commutator(b, c)).matrix)) for c in R]
    worst = float(max(defects))
    ok = worst < 1e-12
    record(10, ok, f"max identity defect {worst:.1e} (<1e-12)")
    assert ok
