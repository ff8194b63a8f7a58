import math

import numpy as np
import pytest

from hardedge.kernels import (
    HardEdgeParams,
    MBParams,
    build_kernel_bundle,
    kernel_matrix,
    borodin_kernel_matrix,
)
from hardedge.fredholm import (
    make_rule,
    fredholm_det,
    gap_probability_mb,
    gap_probability_hardedge,
    GapPoint,
    GapCurve,
)
from hardedge.reference_data import table1_logE


def test_gauss_legendre_two_point_rule():
    rule = make_rule("gauss_legendre", 2, -1.0, 1.0)
    assert rule.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)])
    assert rule.weights == pytest.approx([1.0, 1.0])


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_gauss_legendre_cubic_exactness(n):
    rule = make_rule("gauss_legendre", n, 0.0, 1.0)
    assert float(rule.weights @ rule.nodes ** 3) == pytest.approx(0.25,
                                                                  abs=1e-14)


def test_clenshaw_curtis_weight_sum():
    rule = make_rule("clenshaw_curtis", 9, 0.0, 4.0)
    assert float(rule.weights.sum()) == pytest.approx(4.0, abs=4e-12)
    assert np.all(np.diff(rule.nodes) > 0)
    assert rule.nodes[0] > 0.0 and rule.nodes[-1] < 4.0
    assert np.all(rule.weights > 0)


def test_rule_validation():
    with pytest.raises(ValueError):
        make_rule("gauss_legendre", 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        make_rule("gauss_legendre", 4, 1.0, 0.0)
    with pytest.raises(ValueError):
        make_rule("simpson", 4, 0.0, 1.0)


def test_zero_kernel_determinant():
    rule = make_rule("gauss_legendre", 12, 0.0, 2.0)
    det, logdet = fredholm_det(lambda xs, ys: np.zeros((12, 12)), rule)
    assert det == 1.0
    assert logdet == 0.0


def test_rank_one_kernel_determinant():
    # K(x,y) = x*y on (0,1): det = 1 - int x^2 = 2/3
    rule = make_rule("gauss_legendre", 16, 0.0, 1.0)
    det, logdet = fredholm_det(lambda xs, ys: np.outer(xs, ys), rule)
    assert det == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert logdet == pytest.approx(math.log(2.0 / 3.0), abs=1e-12)


def test_mb_determinant_reference_value():
    mb = MBParams(c=0.0)
    rule = make_rule("gauss_legendre", 48, 0.0, 4.0)
    _, logdet = fredholm_det(lambda xs, ys: borodin_kernel_matrix(mb, xs, ys),
                             rule)
    assert logdet == pytest.approx(table1_logE(0, 4), abs=1e-8)


def test_gap_probability_mb_reference_values():
    assert gap_probability_mb(MBParams(c=0.0), 1e-4).E == pytest.approx(
        1.0, abs=1e-3)
    assert gap_probability_mb(MBParams(c=1.0), 4.0).logE == pytest.approx(
        table1_logE(1, 4), abs=1e-8)
    # at r = 14 the Wright-series cancellation floor (~5e-8) caps the
    # achievable node-doubling agreement, so the target is loosened there
    assert gap_probability_mb(MBParams(c=0.0), 14.0,
                              target_tol=5e-7).logE == pytest.approx(
        table1_logE(0, 14), abs=1e-6)


def test_gap_probability_mb_refuses_underflow_range():
    with pytest.raises(ValueError):
        gap_probability_mb(MBParams(c=0.0), 15.5)


def test_node_doubling_convergence_rate():
    mb = MBParams(c=0.0)

    def logdet_at(n):
        rule = make_rule("gauss_legendre", n, 0.0, 6.0)
        return fredholm_det(
            lambda xs, ys: borodin_kernel_matrix(mb, xs, ys), rule)[1]

    vals = {n: logdet_at(n) for n in (8, 16, 32, 64)}
    deltas = [abs(vals[16] - vals[8]), abs(vals[32] - vals[16]),
              abs(vals[64] - vals[32])]
    for a, b in zip(deltas, deltas[1:]):
        if a < 1e-10:
            break
        assert b <= a / 10.0


def test_rule_independence():
    gl = gap_probability_mb(MBParams(c=0.0), 4.0, kind="gauss_legendre")
    cc = gap_probability_mb(MBParams(c=0.0), 4.0, kind="clenshaw_curtis")
    assert abs(gl.logE - cc.logE) <= 1e-8


def test_hardedge_m1_small_interval():
    params = HardEdgeParams.from_nu((0.0, 0.0))
    pt = gap_probability_hardedge(params, 1e-4)
    assert pt.E == pytest.approx(1.0, abs=1e-3)


def test_hardedge_m1_against_trapezoid_oracle():
    # independent low-order oracle: 512-node trapezoid Nystrom determinant
    params = HardEdgeParams.from_nu((0.0, 0.0))
    bundle = build_kernel_bundle(params)
    s, n = 1.0, 512
    x = np.linspace(0.0, s, n + 1)
    x[0] = 1e-13   # the nu=(0,0) kernel is analytic at the left endpoint
    w = np.full(n + 1, s / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    K = kernel_matrix(bundle, x, x)
    _, oracle = np.linalg.slogdet(np.eye(n + 1) - w[None, :] * K)
    pt = gap_probability_hardedge(params, s, target_tol=1e-10)
    assert abs(pt.E - math.exp(float(oracle))) <= 1e-6


def test_hardedge_m2_matches_mb_identity():
    params = HardEdgeParams.from_nu((0.0, -0.5, 0.0))
    sub = gap_probability_hardedge(params, 4.0, method="substitution")
    mb = gap_probability_mb(MBParams(c=0.0), 4.0)
    assert abs(sub.logE - mb.logE) <= 1e-8


def test_hardedge_m2_jacobi_cross_check():
    params = HardEdgeParams.from_nu((0.0, -0.5, 0.0))
    jac = gap_probability_hardedge(params, 1.0, target_tol=1e-7,
                                   method="jacobi")
    mb = gap_probability_hardedge(params, 1.0, method="mb")
    assert abs(jac.logE - mb.logE) <= 1e-6


def test_gap_curve_monotone_and_bounded():
    mb = MBParams(c=0.0)
    pts = [gap_probability_mb(mb, r) for r in (0.5, 1.0, 2.0, 4.0)]
    curve = GapCurve(abscissa_kind="r", points=pts).validate()
    es = [p.E for p in curve.points]
    assert all(0.0 < e <= 1.0 for e in es)
    assert all(b < a for a, b in zip(es, es[1:]))


def test_gap_curve_validation_rejects_bad_data():
    good = GapPoint(1.0, 0.5, math.log(0.5), 16, 0.0)
    bad = GapPoint(2.0, 1.5, math.log(1.5), 16, 0.0)
    with pytest.raises(ValueError):
        GapCurve("s", [good, bad]).validate()
