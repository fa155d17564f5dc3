import numpy as np
import pytest

from memsfold import continuation as cont
from memsfold import singular
from memsfold.model import ModelParams
from memsfold.shooting import find_solutions

# values cross-validated against an independent ODE-shooting minimization
LAM_LOWER_005 = 0.053231858572
LAM_UPPER_005 = 0.352005888385


@pytest.fixture(scope="module")
def branch005():
    return cont.trace_branch(0.05, lambda_max=1.0)


@pytest.fixture(scope="module")
def branch0():
    return cont.trace_branch(0.0, lambda_max=1.0, lambda_min=1e-6)


def test_eps005_two_folds(branch005):
    folds = branch005.folds
    assert len(folds) == 2
    kinds = {f.kind: f for f in folds}
    assert set(kinds) == {"lower", "upper"}
    assert kinds["lower"].lambda_fold < kinds["upper"].lambda_fold
    assert abs(kinds["lower"].lambda_fold - LAM_LOWER_005) < 1e-7
    assert abs(kinds["upper"].lambda_fold - LAM_UPPER_005) < 1e-6


def test_eps0_single_fold_matches_oracle(branch0):
    folds = branch0.folds
    assert len(folds) == 1
    lam0, _ = singular.lambda0_star()
    assert abs(folds[0].lambda_fold - lam0) < 1e-8


def test_eps0_terminates_at_point_b(branch0):
    last = branch0.points[-1]
    assert last.lam < 1e-5
    assert abs(last.norm2 - 2.0 / 3.0) < 2e-3


def test_branch_points_on_solution_curve(branch005):
    # every stored point satisfies the residual equation in its chart
    from memsfold import firstint
    for q in branch005.points[:: max(len(branch005.points) // 25, 1)]:
        assert abs(firstint.residual_plateau(0.05, q.lam, q.coord)) < 1e-9
    for q in branch005.points:
        assert 0.0 <= q.norm2 <= 2.0


def test_upper_branch_end_norm_matches_expansion(branch005):
    from memsfold.asymptotics import norm_upper
    last = branch005.points[-1]
    assert last.lam > 1.0
    scale = 0.05**1.5 * abs(np.log(0.05))
    assert abs(last.norm2 - norm_upper(0.05, last.lam)) < scale


def test_monotone_norm_between_folds(branch005):
    pts = branch005.points
    folds = {f.kind: f for f in branch005.folds}
    i_up = folds["upper"].index
    i_lo = folds["lower"].index
    lam = np.array([q.lam for q in pts])
    n2 = np.array([q.norm2 for q in pts])
    # lower branch: norm increasing with lam
    seg = slice(0, i_up - 1)
    assert np.all(np.diff(n2[seg]) > 0) and np.all(np.diff(lam[seg]) > 0)
    # middle branch: lam decreasing, norm increasing -> norm decreasing in lam
    seg = slice(i_up + 2, i_lo - 1)
    assert np.all(np.diff(lam[seg]) < 0) and np.all(np.diff(n2[seg]) > 0)
    # upper branch: increasing again
    seg = slice(i_lo + 2, len(pts))
    assert np.all(np.diff(n2[seg]) > 0) and np.all(np.diff(lam[seg]) > 0)


def test_arclength_strictly_increasing(branch005):
    s = np.array([q.arclength for q in branch005.points])
    assert np.all(np.diff(s) > 0)


def test_stability_alternates_across_folds(branch005):
    folds = {f.kind: f for f in branch005.folds}
    lam_up, lam_lo = folds["upper"].lambda_fold, folds["lower"].lambda_fold
    mid = 0.5 * (lam_lo + lam_up)
    p = ModelParams(eps=0.05, lam=mid)
    states = [cont.classify_stability(s, p) for s in find_solutions(p)]
    assert states == ["stable", "unstable", "stable"]


def test_retrace_with_halved_step_same_curve(branch005):
    # points of a finer trace lie on the curve defined by the coarser one
    br2 = cont.trace_branch(0.05, h0=1e-3, s_max=1.0)
    from memsfold import firstint
    for q in br2.points[::5]:
        assert abs(firstint.residual_plateau(0.05, q.lam, q.coord)) < 1e-9
    # fold locations agree between step sizes
    br3 = cont.trace_branch(0.05, h0=1e-3, stop_after_folds=2, lambda_max=0.6)
    kinds3 = {f.kind: f.lambda_fold for f in br3.folds}
    assert abs(kinds3["lower"] - LAM_LOWER_005) < 1e-7
    assert abs(kinds3["upper"] - LAM_UPPER_005) < 1e-6


def test_detected_folds_have_small_tangent(branch005):
    for f in branch005.folds:
        # limited by corrector noise over curvature (vertex of a value-based
        # extremum fit cannot beat sqrt(noise/curvature) ~ 1e-6 in arclength)
        assert f.dlam_ds < 1e-3


def test_monotone_branch_has_no_folds():
    br = cont.trace_branch(0.05, s_max=0.3)   # short lower-branch segment
    assert br.folds == []


def test_fold_report_rows():
    rows = cont.fold_report([0.05])
    assert len(rows) == 1
    r = rows[0]
    assert set(r) == {"eps", "lambda_star_numeric", "lambda_star_asymptotic",
                      "abs_error", "lambda_upper_numeric"}
    assert abs(r["lambda_star_numeric"] - LAM_LOWER_005) < 1e-7
    assert cont.fold_report([]) == []


def test_branch_csv_roundtrip(tmp_path, branch005):
    path = tmp_path / "b.csv"
    cont.write_branch_csv(branch005, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "branch_id,idx,eps,lambda,delta,w0,norm_u2,stability,is_fold"
    assert len(lines) == len(branch005.points) + 1
    assert sum(1 for ln in lines[1:] if ln.endswith(",1")) == 2
    # 17-significant-digit round trip
    lam0 = float(lines[1].split(",")[3])
    assert lam0 == branch005.points[0].lam


def test_classify_stability_unknown_on_unresolvable_layer():
    p = ModelParams(eps=0.002, lam=0.5)
    sols = find_solutions(p)
    assert len(sols) == 1
    assert cont.classify_stability(sols[0], p) == "unknown"
