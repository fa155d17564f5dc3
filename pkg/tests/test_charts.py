import numpy as np
import pytest

from memsfold import charts
from memsfold.asymptotics import xi1_out_expansion
from memsfold.errors import ParameterDomainError, SingularDomainError
from memsfold.integrate import integrate

SQ3 = np.sqrt(3.0)
W_INF = 2.0 / SQ3


def test_rhs_K1_structure():
    # singular-limit hyperplanes
    d = charts.rhs_K1((0.5, -1.0, 0.0, 0.0), delta=0.7)
    assert d[1] == 0.0                       # w1' = 0 on {eps1 = 0}
    d = charts.rhs_K1((0.0, -1.0, 0.0, 0.3), delta=0.7)
    assert d[2] == 0.0                       # xi1' = 0 on {r1 = 0}
    # conservation of r1*eps1 at the field level
    rng = np.random.RandomState(0)
    for _ in range(20):
        s = rng.uniform(0.1, 1.0, size=4)
        f = charts.rhs_K1(s, delta=0.3)
        assert abs(f[0] * s[3] + s[0] * f[3]) < 1e-15


def test_rhs_K2_saddle():
    f = charts.rhs_K2((1.0, 0.0, 0.0, 0.1), delta=0.5)
    assert f[0] == 0.0 and f[1] == 0.0
    # slow drift rate on the critical manifold
    assert np.isclose(f[2], 0.5 * 0.1 * 1.0)
    eig = charts.saddle_eigenvalues()
    assert abs(eig[0] + np.sqrt(2.0)) < 1e-10
    assert abs(eig[1] - np.sqrt(2.0)) < 1e-10


def test_chart_changes():
    s = charts.K1State(r1=0.02, w1=-1.0, xi1=0.0, eps1=0.5)
    t = charts.kappa12(s)
    assert t == charts.K2State(u2=2.0, w2=-1.0, xi2=0.0, r2=0.01)
    rng = np.random.RandomState(1)
    for _ in range(30):
        s = charts.K1State(*rng.uniform(0.05, 1.5, size=4))
        back = charts.kappa21(charts.kappa12(s))
        assert np.allclose([back.r1, back.w1, back.xi1, back.eps1],
                           [s.r1, s.w1, s.xi1, s.eps1], rtol=1e-15, atol=1e-15)
    with pytest.raises(SingularDomainError):
        charts.kappa12(charts.K1State(1.0, 0.0, 0.0, 0.0))
    with pytest.raises(SingularDomainError):
        charts.kappa21(charts.K2State(0.0, 0.0, 0.0, 0.1))


def test_section_image():
    sigma = 0.1
    s = charts.K1State(r1=0.3, w1=-1.0, xi1=0.2, eps1=sigma)
    assert np.isclose(charts.kappa12(s).u2, 1.0 / sigma, rtol=1e-15)
    spec = charts.SectionSpec(which="Sigma2in", sigma=sigma)
    assert spec.contains(charts.kappa12(s))
    with pytest.raises(ParameterDomainError):
        charts.SectionSpec(which="Sigma1in", rho=1.5)


def test_manifold_graphs():
    assert charts.w2_manifold(1.0, -1) == 0.0
    assert np.isclose(charts.w2_manifold(1e9, -1), -W_INF, atol=1e-8)
    assert np.isclose(charts.w2_manifold(2.0, -1), -np.sqrt(5.0 / 12.0), rtol=1e-14)
    assert np.isclose(charts.w1_manifold(0.0, -1), -W_INF, rtol=1e-15)
    assert charts.w1_manifold(1.0, -1) == 0.0
    assert np.isclose(charts.w1_manifold(0.5, -1), charts.w2_manifold(2.0, -1),
                      rtol=1e-15)
    with pytest.raises(ParameterDomainError):
        charts.w2_manifold(0.5, -1)
    with pytest.raises(ParameterDomainError):
        charts.w1_manifold(1.2, -1)


def test_hamiltonian():
    assert np.isclose(charts.hamiltonian_K2(1.0, 0.0), 2.0 / 3.0, rtol=1e-15)
    assert np.isclose(charts.hamiltonian_K2(2.0, -np.sqrt(5.0 / 12.0)), 2.0 / 3.0,
                      rtol=1e-14)
    hit, traj = charts.k2_flow_to_turn(20.0, charts.w2_manifold(20.0, -1) + 0.01,
                                       rtol=1e-10, atol=1e-10, record=True)
    H = charts.hamiltonian_K2(traj.ys[:, 0], traj.ys[:, 1])
    assert np.max(np.abs(H - H[0])) <= 1e-9 * abs(H[0])


def test_transition_K1_closed_form_slope():
    for (w, eps) in ((-W_INF, 1e-3), (-1.3, 1e-2), (-1.05, 1e-3)):
        w1o, xi1o, r1o = charts.transition_K1(w, eps, delta=1.0, sigma=0.1)
        assert abs(w1o - charts.transition_w1_exact(w, eps, 0.1)) < 1e-10
        assert np.isclose(r1o, eps / 0.1, rtol=1e-10)


def test_transition_K1_exit_position_remainders():
    # xi1_out = -1 - delta/w + (delta/w^3) eps ln eps + O(eps)
    w, delta, sigma = -1.2, 0.8, 0.1
    for eps in (1e-2, 1e-3, 1e-4):
        _, xi1o, _ = charts.transition_K1(w, eps, delta=delta, sigma=sigma)
        lead = -1.0 - delta / w + (delta / w**3) * eps * np.log(eps)
        assert abs(xi1o - lead) / eps < 12.0


def test_transition_K1_switchback_expansion():
    # at the cylinder slope the exit position follows
    # -1 + (sqrt(3)/2) delta - (3 sqrt(3)/8) delta eps ln(eps) + O(delta eps)
    delta = 1.0
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        _, xi1o, _ = charts.transition_K1(-W_INF, eps, delta=delta, sigma=0.1)
        ratios.append(abs(xi1o - xi1_out_expansion(delta, eps)) / (delta * eps))
    assert max(ratios) < 15.0


def test_rhs_kappa1():
    rng = np.random.RandomState(2)
    for _ in range(20):
        s = rng.uniform(0.05, 1.0, size=4)
        f = charts.rhs_kappa1(s, delta=0.4)
        assert abs(f[0] * s[3] + s[0] * f[3]) < 1e-15   # d(r1*lam1)/dt = 0
    f = charts.rhs_kappa1((0.5, -1.0, 0.0, 0.0), delta=0.0)
    assert f[1] == 0.0                                   # degenerate lam = 0 flow
    eig = charts.kappa1_eigenvalues()
    assert np.allclose(eig, [-1.0, 0.0, 0.0, 1.0], atol=1e-8)


def test_blowdown_conserved_along_flow():
    traj = integrate(lambda t, y: charts.rhs_K1(y, 0.4), [0.5, -0.8, 0.0, 0.2],
                     (0.0, 0.5), rtol=1e-12, atol=1e-12)
    prod = traj.ys[:, 0] * traj.ys[:, 3]
    assert np.max(np.abs(prod - prod[0])) <= 1e-12 * abs(prod[0])


def test_solve_w0A():
    w0, lead = charts.solve_w0A(0.0, 0.5)
    assert w0 == -1.0 and lead == -1.0
    w0, lead = charts.solve_w0A(0.01, 0.0)
    assert np.isclose(lead, -1.0 + 0.01 * np.log(0.01), rtol=1e-15)
    # the relation is linear in w0; verify against its exact solution
    L = np.log(0.01)
    exact = -(1.0 - 4.0 * 0.01 * L) / (1.0 - 3.0 * 0.01 * L)
    assert np.isclose(w0, exact, rtol=1e-12)
    # residual of the relation at the root
    g = w0 + 1.0 - (4.0 + 3.0 * w0) * 0.01 * L
    assert abs(g) < 1e-13


def test_solve_w0A_cross_check_with_shooting():
    # eps = 0 shooting slope near touchdown agrees within the O(lam) remainder
    from memsfold.model import ModelParams
    from memsfold.shooting import find_solutions
    for lam in (1e-3, 1e-4):
        sols = find_solutions(ModelParams(eps=0.0, lam=lam))
        w0_shoot = min(sols, key=lambda s: abs(s.w0 + 1.0)).w0
        w0_rel, _ = charts.solve_w0A(lam, 0.0)
        assert abs(w0_shoot - w0_rel) < 2.0 * lam


def test_turning_offset_law_and_passage_slope():
    # conserved-quantity turning law, and the log-divergence rate of the
    # space accumulated while hugging the saddle
    for dw in (1e-3, 1e-4):
        hit, _ = charts.k2_flow_to_turn(10.0, float(charts.w2_manifold(10.0, -1)) + dw,
                                        rtol=1e-12, atol=1e-12)
        pred = charts.turning_u2_of_offset(dw)
        assert abs(hit.y[0] - pred) / (pred - 1.0) < 0.10
    delta, r2 = 1.0, 1e-4
    dws = np.array([1e-3, 1e-4, 1e-5, 1e-6])
    xi_end = [charts.k2_flow_to_turn(10.0, float(charts.w2_manifold(10.0, -1)) + dw,
                                     delta=delta, r2=r2, rtol=1e-12, atol=1e-12)[0].y[2]
              for dw in dws]
    slope = np.polyfit(np.log(dws), xi_end, 1)[0]
    assert abs(slope - (-np.sqrt(2.0) / 4.0 * delta * r2)) < 0.05 * np.sqrt(2.0) / 4.0 * delta * r2


def test_charts_check_all_pass():
    checks = charts.charts_check()
    failed = [c for c in checks if not c["pass"]]
    assert failed == [], failed
