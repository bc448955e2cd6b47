import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detkernel.errors import InvalidSignature, NonConstantResidue, PoleLine
from detkernel.signatures import GroupFamily, Signature, enumerate_signatures
from detkernel.unipotent import (
    BlowupPoint,
    SignatureClass,
    _complex_coefficient,
    blowup_coefficient,
    blowup_limit,
    classify_O_unipotent,
    classify_signature,
    coefficient_orders,
    extrapolated_limit,
    o_unipotent_limit,
    slope,
    unipotent_report,
    xi_coefficient,
)
from detkernel.plancherel import default_calibration


def sigU(*parts):
    return Signature.of("U", parts)


def sigO(*parts):
    return Signature.of("O", parts)


@pytest.mark.parametrize("parts,cls,orders", [
    ((3, 0), "Z0", (0, 0)),
    ((0, -2), "Z1", (0, 1)),
    ((2, 1), "Tail", (1, 0)),
    ((-1, -3), "Tail", (1, 2)),
])
def test_u2_alpha1_examples(parts, cls, orders):
    sig = sigU(*parts)
    assert str(classify_signature(1, sig)) == cls
    assert coefficient_orders(1, sig) == orders


@pytest.mark.parametrize("n", [2, 3, 4])
def test_classes_disjoint_exhaustive_and_match_orders(n):
    for alpha in range(1, n):
        seen = {}
        for sig in enumerate_signatures(GroupFamily.U(n), 5):
            cls = classify_signature(alpha, sig)
            k, j = coefficient_orders(alpha, sig)
            assert k >= 0 and 0 <= j <= n
            assert (cls.kind == "Z") == (k == 0)
            if cls.kind == "Z":
                assert cls.theta == j and 0 <= j <= n - alpha
                seen[j] = seen.get(j, 0) + 1
        assert sorted(seen) == list(range(n - alpha + 1))


def test_alpha_range_and_family_checks():
    with pytest.raises(ValueError):
        classify_signature(2, sigU(1, 0))
    with pytest.raises(InvalidSignature):
        classify_signature(1, sigO(1, 0))
    with pytest.raises(ValueError):
        BlowupPoint(1, 0.0, 0.0, 1e-3)
    with pytest.raises(ValueError):
        BlowupPoint(0, 1.0, 1.0, 1e-3)


def test_pole_line():
    with pytest.raises(PoleLine):
        blowup_coefficient(BlowupPoint(1, 1.0, -1.0, 1e-3), 2, sigU(3, 0))
    with pytest.raises(PoleLine):
        blowup_limit(1, sigU(3, 0), 2.0, -2.0)


@pytest.mark.parametrize("parts", [(3, 0), (0, -2), (5, 0), (2, 1)])
def test_rescaling_invariance(parts):
    sig = sigU(*parts)
    for s, t in [(1.0, 1.0), (1.0, 2.0), (0.3, 1.7)]:
        a = blowup_limit(1, sig, s, t)
        b = blowup_limit(1, sig, 2 * s, 2 * t)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
        bp = BlowupPoint(1, s, t, 1e-4)
        c1 = blowup_coefficient(bp, 2, sig)
        c2 = blowup_coefficient(bp.rescaled(2.0), 2, sig)
        assert c1 == pytest.approx(c2, rel=1e-12, abs=1e-300)


def test_direction_dependence_z0_vs_z1():
    z0, z1 = sigU(3, 0), sigU(0, -2)
    # Z0 carries s/(s+t), Z1 carries t/(s+t)
    assert blowup_limit(1, z0, 1.0, 0.0) != 0 and blowup_limit(1, z0, 0.0, 1.0) == 0
    assert blowup_limit(1, z1, 0.0, 1.0) != 0 and blowup_limit(1, z1, 1.0, 0.0) == 0


def test_complex_path_matches_real_path():
    cal = default_calibration()
    kappa = cal.kappa(GroupFamily.U(3))
    for sig in [sigU(4, 1, 0), sigU(1, 0, -1), sigU(1, 0, -3)]:
        bp = BlowupPoint(2, 1.0, 2.0, 1e-3)
        sigma, tau = bp.parameters(3)
        real = blowup_coefficient(bp, 3, sig, cal)
        assert _complex_coefficient(sigma, tau, sig, kappa) == pytest.approx(real, rel=1e-10)
        # along a complex direction the Z-block limit is R t^j s^(n-alpha-j) / (s+t)^(n-alpha)
        j = classify_signature(2, sig).theta
        s, t = 1.0 + 0.5j, 2.0 - 0.25j
        near = blowup_coefficient(BlowupPoint(2, s, t, 1e-7), 3, sig, cal)
        factor = t ** j * s ** (1 - j) / (s + t)
        assert near == pytest.approx(xi_coefficient(2, j, sig, cal) * factor, rel=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.data())
def test_slope_matches_order(n, data):
    parts = sorted(data.draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n, unique=True)), reverse=True)
    sig = sigU(*parts)
    alpha = data.draw(st.integers(1, n - 1))
    k, _ = coefficient_orders(alpha, sig)
    assert slope(alpha, sig) == pytest.approx(k, abs=0.05)


@pytest.mark.parametrize("n,alpha", [(2, 1), (3, 1), (3, 2)])
def test_xi_sign_constant_per_block(n, alpha):
    signs = {}
    for sig in enumerate_signatures(GroupFamily.U(n), 6):
        cls = classify_signature(alpha, sig)
        if cls.kind == "Z":
            signs.setdefault(cls.theta, set()).add(np.sign(xi_coefficient(alpha, cls.theta, sig)))
    assert all(len(v) == 1 for v in signs.values())


def test_xi_frozen_block_signs():
    assert xi_coefficient(1, 0, sigU(3, 0)) > 0
    assert xi_coefficient(1, 1, sigU(0, -2)) > 0
    assert xi_coefficient(2, 0, sigU(4, 1, 0)) > 0
    assert xi_coefficient(2, 1, sigU(1, 0, -3)) < 0


def test_xi_outside_block_is_zero():
    assert xi_coefficient(1, 1, sigU(3, 0)) == 0.0
    assert xi_coefficient(1, 0, sigU(2, 1)) == 0.0


def test_xi_methods_agree():
    for sig in [sigU(3, 0), sigU(0, -4), sigU(6, 0)]:
        j = classify_signature(1, sig).theta
        exact = xi_coefficient(1, j, sig)
        assert xi_coefficient(1, j, sig, method="richardson") == pytest.approx(exact, rel=1e-5)
    with pytest.raises(ValueError):
        xi_coefficient(1, 0, sigU(3, 0), method="bogus")


def test_xi_constancy_violation_is_reported():
    # the extrapolated limits agree only to about 1e-7
    with pytest.raises(NonConstantResidue):
        for sig in enumerate_signatures(GroupFamily.U(3), 6):
            cls = classify_signature(2, sig)
            if cls.kind == "Z":
                xi_coefficient(2, cls.theta, sig, method="richardson", tol=1e-15)


def test_extrapolated_limit_matches_exact():
    sig = sigU(4, 0)
    assert complex(extrapolated_limit(1, sig, 1.0, 2.0)) == pytest.approx(complex(blowup_limit(1, sig, 1.0, 2.0)), rel=1e-5)


def test_o_family_examples():
    for l1 in range(1, 6):
        assert classify_O_unipotent(1, sigO(l1, 0))
        assert o_unipotent_limit(1, sigO(l1, 0)) != 0.0
    assert classify_O_unipotent(2, sigO(1, 0))
    assert o_unipotent_limit(2, sigO(1, 0)) != 0.0
    assert not classify_O_unipotent(1, sigO(2, 1))
    assert o_unipotent_limit(1, sigO(2, 1)) == 0.0
    with pytest.raises(InvalidSignature):
        classify_O_unipotent(1, sigU(1, 0))
    with pytest.raises(ValueError):
        classify_O_unipotent(3, sigO(1, 0))


@pytest.mark.parametrize("n", [2, 3])
def test_o_survivors_single_signed(n):
    for alpha in range(1, n + 1):
        signs = set()
        for sig in enumerate_signatures(GroupFamily.O(n), 5):
            lim = o_unipotent_limit(alpha, sig)
            assert (lim != 0.0) == classify_O_unipotent(alpha, sig)
            if lim:
                signs.add(np.sign(lim))
        assert len(signs) == 1


def test_report_structure():
    rep = unipotent_report(2, 1, bound=4)
    assert rep["rank"] == 2 and rep["alpha"] == 1
    assert len(rep["signatures"]) == len(enumerate_signatures(GroupFamily.U(2), 4))
    assert set(rep["blocks"]) == {"Z0", "Z1"}
    assert all(b["sign_constant"] for b in rep["blocks"].values())
    for row in rep["signatures"]:
        assert ("xi" in row) == row["class"].startswith("Z")


def test_signature_class_str():
    assert str(SignatureClass("Z", 2)) == "Z2" and str(SignatureClass("Tail")) == "Tail"
