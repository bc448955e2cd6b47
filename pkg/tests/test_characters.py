import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detkernel.characters import (
    QuadratureGrid,
    TorusPoint,
    character,
    character_pm,
    gram_matrix,
    project_harmonic,
    separable_projection,
    weyl_integrate,
)
from detkernel.errors import DegenerateTorusPoint, InvalidSignature, MixedFamily
from detkernel.kernels import eigenangles, random_compact
from detkernel.signatures import (
    GroupFamily,
    Signature,
    conjugate_signature,
    dimension_unitary,
    enumerate_signatures,
    trivial_signature,
)

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)


def test_u2_first_fundamental():
    t = TorusPoint(GroupFamily.U(2), [0.7, 0.3])
    assert character(Signature.of("U", (2, 0)), t) == pytest.approx(np.exp(0.7j) + np.exp(0.3j))


@pytest.mark.parametrize("kind", ["U", "O", "Sp"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_trivial_character_is_one(kind, n):
    fam = GroupFamily(kind, n)
    t = TorusPoint(fam, np.random.default_rng(n).uniform(0.1, 3.0, n) + np.arange(n) * 0.05)
    assert character(trivial_signature(fam), t) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_standard_representation_traces(n):
    # the defining representation's character is the matrix trace
    rng = np.random.default_rng(10 + n)
    std = {"U": (n,) + tuple(range(n - 2, -1, -1)),
           "O": (n,) + tuple(range(n - 2, -1, -1)),
           "Sp": (n + 1,) + tuple(range(n - 1, 0, -1))}
    for kind, parts in std.items():
        fam = GroupFamily(kind, n)
        g = random_compact(fam, rng)
        t = eigenangles(fam, g)
        val = character(Signature(fam, parts), t)
        if kind == "O" and parts[-1] > 0:
            val = 2 * val  # merged ratio is half the O(2n) character here
        assert val == pytest.approx(np.trace(g).real if kind != "U" else np.trace(g), abs=1e-9)


def test_u2_symmetric_square_trace():
    rng = np.random.default_rng(3)
    fam = GroupFamily.U(2)
    g = random_compact(fam, rng)
    expected = (np.trace(g) ** 2 + np.trace(g @ g)) / 2
    assert character(Signature.of("U", (3, 0)), eigenangles(fam, g)) == pytest.approx(expected)


@pytest.mark.parametrize("parts", [(2, 0), (4, 1, 0), (1, -3)])
def test_character_near_identity_is_dimension(parts):
    sig = Signature.of("U", parts)
    t = TorusPoint(sig.family, 1e-3 * np.arange(1, sig.rank + 1))
    assert character(sig, t).real == pytest.approx(dimension_unitary(sig), rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.lists(angles, min_size=2, max_size=2))
def test_character_symmetric_and_conjugation(psi):
    fam = GroupFamily.U(2)
    t = TorusPoint(fam, psi)
    if t.separation < 1e-3:
        return
    sig = Signature.of("U", (3, -1))
    swapped = TorusPoint(fam, psi[::-1])
    assert character(sig, swapped) == pytest.approx(character(sig, t), rel=1e-8, abs=1e-8)
    assert character(conjugate_signature(sig), t) == pytest.approx(np.conj(character(sig, t)), rel=1e-8, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.lists(angles, min_size=2, max_size=2))
def test_o_twin_characters_sum(psi):
    fam = GroupFamily.O(2)
    t = TorusPoint(fam, psi)
    if t.separation < 1e-3:
        return
    sig = Signature.of("O", (3, 1))
    total = character_pm(sig, t, 1) + character_pm(sig, t, -1)
    assert total == pytest.approx(character(sig, t), rel=1e-8, abs=1e-8)


def test_character_errors():
    fam = GroupFamily.U(2)
    with pytest.raises(DegenerateTorusPoint):
        character(Signature.of("U", (2, 0)), TorusPoint(fam, [0.5, 0.5]))
    with pytest.raises(MixedFamily):
        character(Signature.of("O", (2, 0)), TorusPoint(fam, [0.5, 0.1]))
    with pytest.raises(InvalidSignature):
        character_pm(Signature.of("O", (2, 0)), TorusPoint(GroupFamily.O(2), [0.5, 0.1]), 1)


@pytest.mark.parametrize("kind,n", [("U", 1), ("U", 2), ("O", 1), ("O", 2), ("Sp", 1), ("Sp", 2)])
def test_haar_mass_is_one(kind, n):
    grid = QuadratureGrid(32, GroupFamily(kind, n))
    assert weyl_integrate(lambda t: np.ones(t.batch_shape), grid) == pytest.approx(1.0)


@pytest.mark.parametrize("kind,n,bound", [("U", 3, 2), ("Sp", 2, 4)])
def test_gram_identity(kind, n, bound):
    fam = GroupFamily(kind, n)
    sigs = enumerate_signatures(fam, bound)
    g = gram_matrix(sigs, QuadratureGrid(24, fam))
    assert np.max(np.abs(g - np.eye(len(sigs)))) < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_o_merged_norms(n):
    # the merged character splits into two irreducibles exactly when l_n > 0
    fam = GroupFamily.O(n)
    sigs = enumerate_signatures(fam, 4)
    g = gram_matrix(sigs, QuadratureGrid(64, fam))
    expected = np.diag([0.5 if s.parts[-1] > 0 else 1.0 for s in sigs])
    assert np.max(np.abs(g - expected)) < 1e-12


@pytest.mark.parametrize("kind,n", [("U", 2), ("O", 2), ("Sp", 2)])
def test_separable_oracle_matches_grid_for_smooth_weight(kind, n):
    # weight |sin|^2 is a trigonometric polynomial, so the grid is exact
    fam = GroupFamily(kind, n)
    grid = QuadratureGrid(64, fam)
    f = lambda t: np.prod(np.sin(t.angles / 2) ** 2, axis=-1)
    for sig in enumerate_signatures(fam, 3)[:6]:
        assert project_harmonic(f, sig, grid) == pytest.approx(separable_projection(sig, 2.0), abs=1e-10)


def test_grid_validation():
    with pytest.raises(ValueError):
        QuadratureGrid(0, GroupFamily.U(1))
    with pytest.raises(ValueError):
        QuadratureGrid(5, GroupFamily.U(1)).coarsened()
