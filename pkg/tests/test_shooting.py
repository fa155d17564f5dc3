import numpy as np
import pytest

from memsfold import firstint
from memsfold.errors import ParameterDomainError
from memsfold.model import ModelParams
from memsfold.shooting import (NO_TURN_RESIDUAL, find_solutions, mirror_profile,
                               residual, shoot_half, verify_profile)


def test_shot_requires_negative_slope():
    with pytest.raises(ParameterDomainError):
        shoot_half(ModelParams(eps=0.05, lam=0.1), 0.5)


def test_residual_sign_structure():
    p = ModelParams(eps=0.05, lam=0.07)
    assert residual(p, -0.01) < 0.0          # shallow: turns almost immediately
    assert residual(p, -3.0) == NO_TURN_RESIDUAL  # steeper than critical: collapse
    # residual is continuous across a bracket and changes sign
    grid = -np.geomspace(0.02, 2.5, 40)[::-1]
    rs = np.array([residual(p, w) for w in grid])
    assert np.sum(np.abs(np.diff(np.sign(rs))) > 0) >= 3


def test_solution_counts():
    assert len(find_solutions(ModelParams(eps=0.05, lam=0.07))) == 3
    assert len(find_solutions(ModelParams(eps=0.05, lam=0.8))) == 1
    assert len(find_solutions(ModelParams(eps=0.05, lam=0.03))) == 1
    assert len(find_solutions(ModelParams(eps=0.0, lam=0.2))) == 2
    assert len(find_solutions(ModelParams(eps=0.0, lam=0.5))) == 0


def test_roots_satisfy_residual_tolerance():
    p = ModelParams(eps=0.05, lam=0.07)
    for s in find_solutions(p):
        if s.method == "ode":
            assert abs(residual(p, s.w0)) <= 1e-9
        else:
            assert abs(firstint.residual_plateau(p.eps, p.lam, s.plateau)) <= 1e-11


@pytest.mark.parametrize("lam", [0.07, 0.21])
def test_profile_invariants(lam):
    p = ModelParams(eps=0.05, lam=lam)
    sols = find_solutions(p)
    assert len(sols) == 3
    norms = [s.norm2 for s in sols]
    assert norms == sorted(norms)
    for s in sols:
        v = verify_profile(s)
        assert v["bc_residual"] <= 1e-10
        assert v["symmetry"] <= 1e-8
        assert v["bvp_defect"] <= 1e-6
        assert v["min_gap"] > p.eps * (1 - 1e-6)


def test_ode_and_first_integral_agree_on_upper_root():
    # moderate plateau: both routes resolve the same upper solution
    p = ModelParams(eps=0.05, lam=0.07)
    shot_root = [s for s in find_solutions(p)][-1]
    plat = firstint.plateau_of_w0(p.eps, p.lam, shot_root.w0) \
        if shot_root.method == "ode" else shot_root.plateau
    from scipy.optimize import brentq
    plat_fi = brentq(lambda q: firstint.residual_plateau(p.eps, p.lam, q),
                     1e-8, 0.999, xtol=1e-15)
    w0_fi = firstint.w0_of_plateau(p.eps, p.lam, plat_fi)
    assert abs(w0_fi - shot_root.w0) < 1e-6
    assert abs(firstint.norm2_of_plateau(p.eps, p.lam, plat_fi) - shot_root.norm2) < 1e-8


def test_deep_upper_root_delegated():
    sols = find_solutions(ModelParams(eps=0.05, lam=0.21))
    assert [s.method for s in sols] == ["ode", "ode", "first-integral"]


def test_small_lambda_slope_law():
    cs = []
    for lam in (1e-2, 1e-3, 1e-4):
        sols = find_solutions(ModelParams(eps=0.0, lam=lam))
        w0 = min(sols, key=lambda s: abs(s.w0 + 1.0)).w0
        cs.append(abs(w0 - (-1.0 + lam * np.log(lam))) / lam)
    cs = np.array(cs)
    assert np.all(cs < 3.0)
    assert cs.max() / cs.min() < 2.0   # fit-stable constant


def test_mirror_profile_structure():
    p = ModelParams(eps=0.05, lam=0.07)
    shot = shoot_half(p, -1.0938900232352464, record=True, with_norm=True)
    prof = mirror_profile(p, shot, shot.w0)
    assert abs(prof.x[0] + 1.0) < 1e-12
    assert abs(prof.x[-1] - 1.0) < 1e-9
    assert abs(prof.u[0]) < 1e-12 and abs(prof.u[-1]) < 1e-9
    assert prof.w[0] == pytest.approx(-prof.w[-1], rel=1e-9)
    mid = np.argmin(np.abs(prof.x))
    assert abs(prof.w[mid]) < 1e-6


def test_count_structure_across_window():
    # counts follow the fold structure: one solution outside [lam_*, lam^*],
    # three inside (fold values cross-validated in the continuation tests)
    folds = {0.05: (0.053231858572, 0.352005888385),
             0.01: (0.008367728077, 0.350083589)}
    for eps, (lo, up) in folds.items():
        for lam in (0.3 * lo, 0.5 * (lo + up), 2.0 * lo, 0.9 * up, 1.3 * up):
            expect = 3 if lo < lam < up else 1
            got = len(find_solutions(ModelParams(eps=eps, lam=lam)))
            assert got == expect, (eps, lam, expect, got)


def test_no_turn_statuses():
    p = ModelParams(eps=0.05, lam=0.1)
    s = shoot_half(p, -5.0)
    assert s.status == "no-turn"       # crashes through the floor
    assert residual(p, -5.0) == NO_TURN_RESIDUAL
