import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from detkernel.errors import DimensionMismatch, NearSingularDenominator
from detkernel.identities import (
    IDENTITY_IDS,
    IdentityInstance,
    build_matrix,
    closed_form,
    identity_residual,
    matrix_residual,
    random_instance,
    run_identity_suite,
)


def test_cauchy_example():
    inst = IdentityInstance("Cauchy", [1, 2], b=[3, 4])
    assert np.allclose(build_matrix(inst), [[1 / 4, 1 / 5], [1 / 5, 1 / 6]])
    assert closed_form(inst) == pytest.approx(1 / 600)
    assert identity_residual(inst) < 1e-14


def test_l11_trivial_size():
    inst = IdentityInstance("L11", [0.7])
    assert closed_form(inst) == 1.0
    assert identity_residual(inst) == 0.0


def test_l13_single_entry():
    x, a, b = 0.9, 0.4, -1.3
    inst = IdentityInstance("L13", [x], [a], [b])
    entry = (x + a) / (x + b) - (-x + a) / (-x + b)
    assert build_matrix(inst)[0, 0] == pytest.approx(entry)
    assert closed_form(inst) == pytest.approx(2 * x * (a - b) / (x * x - b * b))


def test_l14_first_row_is_two():
    inst = random_instance("L14", 4, np.random.default_rng(1))
    assert np.all(build_matrix(inst)[0] == 2.0)


def test_l13_vanishes_at_zero_variable():
    inst = IdentityInstance("L13", [0.0, 1.1, -2.0], [0.3, 0.5, 1.7], [0.6, -0.9, 2.5])
    assert closed_form(inst) == 0.0
    assert identity_residual(inst) == 0.0


@pytest.mark.parametrize("kind", IDENTITY_IDS)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_small_random_instances(kind, n):
    rng = np.random.default_rng([5, n])
    for _ in range(50):
        assert identity_residual(random_instance(kind, n, rng, gap=0.2)) < 1e-10


@pytest.mark.parametrize("kind", IDENTITY_IDS)
def test_perturbed_entry_is_detected(kind):
    inst = random_instance(kind, 3, np.random.default_rng(2), gap=0.2)
    mat = build_matrix(inst).copy()
    mat[1, 1] += 1e-3
    assert matrix_residual(mat, inst) >= 1e-5


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=4), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_cauchy_antisymmetry(x, y):
    y = y[: len(x)]
    assume(min(abs(p - q) for i, p in enumerate(x) for q in x[i + 1:]) > 1e-2)
    assume(min(abs(p - q) for i, p in enumerate(y) for q in y[i + 1:]) > 1e-2)
    assume(min(abs(p + q) for p in x for q in y) > 1e-2)
    swapped = [x[1], x[0]] + x[2:]
    a = closed_form(IdentityInstance("Cauchy", x, b=y))
    b = closed_form(IdentityInstance("Cauchy", swapped, b=y))
    assert b == pytest.approx(-a, rel=1e-12)


def _mp_matrix(inst):
    x = [mpmath.mpf(v) for v in inst.x]
    a = [mpmath.mpf(v) for v in inst.a]
    b = [mpmath.mpf(v) for v in inst.b]
    n = len(x)

    def partial(r, xv):
        out = mpmath.mpf(1)
        for m in range(r):
            out *= (xv + a[m]) / (xv + b[m])
        return out

    kind = inst.identity_id
    if kind == "Cauchy":
        return mpmath.matrix([[1 / (x[k] + b[l]) for k in range(n)] for l in range(n)])
    if kind == "L11":
        return mpmath.matrix([[1] * n] + [[1 / (x[k] + b[r]) for k in range(n)] for r in range(n - 1)])
    if kind == "L12":
        return mpmath.matrix([[partial(r, x[k]) for k in range(n)] for r in range(n)])
    if kind == "L13":
        return mpmath.matrix([[partial(r, x[k]) - partial(r, -x[k]) for k in range(n)] for r in range(1, n + 1)])
    return mpmath.matrix([[partial(r, x[k]) + partial(r, -x[k]) for k in range(n)] for r in range(n)])


@pytest.mark.parametrize("kind", IDENTITY_IDS)
def test_closed_forms_exact_in_extended_precision(kind):
    # the hardest double-precision instances satisfy the identity to ~1e-14
    # once the matrix is formed without rounding
    rng = np.random.default_rng([0, IDENTITY_IDS.index(kind), 6])
    insts = [random_instance(kind, 6, rng) for _ in range(500)]
    hardest = sorted(insts, key=identity_residual)[-3:]
    with mpmath.workdps(50):
        for inst in hardest:
            det = mpmath.det(_mp_matrix(inst))
            rhs = closed_form(inst)
            assert float(abs(det - rhs) / abs(rhs)) < 1e-12


def test_validation():
    with pytest.raises(DimensionMismatch):
        IdentityInstance("L12", [1.0, 2.0], [0.5], [0.1, 0.2])
    with pytest.raises(NearSingularDenominator):
        IdentityInstance("Cauchy", [1.0, 2.0], b=[-1.0, 3.0])
    with pytest.raises(ValueError):
        IdentityInstance("L99", [1.0])


def test_suite_is_reproducible():
    a = run_identity_suite(n_max=3, instances=20, seed=4)
    b = run_identity_suite(n_max=3, instances=20, seed=4)
    assert a == b
    assert {r.identity_id for r in a} == set(IDENTITY_IDS)
