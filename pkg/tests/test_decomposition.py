import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dmolab.core import ContractError, ObjectiveBounds
from dmolab.decomposition import (
    LAYER_SPEC,
    Association,
    associate,
    expected_weight_count,
    fitted_layer_spec,
    generate_weights,
    normalize,
    perpendicular_distance,
    perpendicular_distances,
    simplex_lattice,
    tchebycheff,
    occupation_rate,
    weights_for_population,
)
from oracles import labels_of, perp

TABLE_COUNTS = {2: 300, 3: 300, 4: 286, 5: 280, 6: 273, 7: 294}
unit = st.floats(0, 1, allow_nan=False)


@pytest.mark.parametrize("m, count", sorted(TABLE_COUNTS.items()))
def test_weight_counts(m, count):
    W = generate_weights(m)
    assert len(W) == count == expected_weight_count(m, LAYER_SPEC[m])
    assert W.vectors.shape == (count, m)
    assert np.allclose(W.vectors.sum(axis=1), 1.0) and np.all(W.vectors >= 0)
    assert len(np.unique(W.vectors.round(12), axis=0)) == count


def test_two_layer_split_and_inner_shrink():
    W = generate_weights(5).vectors
    boundary, inner = W[:210], W[210:]
    assert len(inner) == 70
    # the inner layer never touches a face of the simplex
    assert inner.min() >= 0.5 / 5 - 1e-12 and boundary.min() == 0.0


@pytest.mark.parametrize("m", [1, 8])
def test_unsupported_dimension(m):
    with pytest.raises(ContractError):
        generate_weights(m)


def test_simplex_lattice_small_case():
    L = simplex_lattice(3, 2)
    expected = {(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5)}
    assert {tuple(r) for r in L} == expected


@pytest.mark.parametrize("m, count", [(2, 100), (3, 91), (4, 84), (5, 85), (6, 77), (7, 91)])
def test_weights_fitted_to_a_small_population(m, count):
    W = weights_for_population(m, 100)
    assert len(W) == count <= 100
    assert len(weights_for_population(m, 300)) == TABLE_COUNTS[m]


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("cap", [20, 57, 150])
def test_fitted_layout_is_largest_under_the_cap(m, cap):
    spec = fitted_layer_spec(m, cap)
    c = expected_weight_count(m, spec)
    assert c <= cap
    if len(spec) == 1:
        assert expected_weight_count(m, (spec[0] + 1,)) > cap


class TestNormalize:
    bounds = ObjectiveBounds(np.array([0.0, 1.0]), np.array([1.0, 2.0]))

    def test_corners(self):
        assert np.allclose(normalize(self.bounds.ideal, self.bounds), 0.0)
        assert np.allclose(normalize(self.bounds.nadir, self.bounds), 1.0)

    def test_midpoint(self):
        assert np.allclose(normalize(np.array([0.5, 1.5]), self.bounds), [0.5, 0.5])


class TestPerpendicularDistance:
    @pytest.mark.parametrize(
        "fbar, w, d",
        [((2, 2), (1, 1), 0.0), ((1, 1), (1, 0), 1.0), ((1, 0), (1, 1), math.sqrt(2) / 2)],
    )
    def test_examples(self, fbar, w, d):
        assert perpendicular_distance(np.array(fbar), np.array(w)) == pytest.approx(d, abs=1e-12)

    def test_zero_weight(self):
        with pytest.raises(ContractError):
            perpendicular_distance(np.ones(2), np.zeros(2))

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            perpendicular_distance(np.ones(2), np.ones(3))

    @given(arrays(np.float64, 3, elements=unit), arrays(np.float64, 3, elements=unit), st.floats(0, 10))
    def test_homogeneity(self, f, w, lam):
        if w.sum() < 1e-3:
            return
        assert perpendicular_distance(lam * f, w) == pytest.approx(
            lam * perpendicular_distance(f, w), abs=1e-9
        )

    def test_matrix_form_matches_oracle(self):
        r = np.random.default_rng(0)
        F, W = r.random((30, 4)), generate_weights(4).vectors[:50]
        D = perpendicular_distances(F, W)
        ref = np.array([[perp(f, w) for w in W] for f in F])
        assert np.allclose(D, ref, atol=1e-9)


class TestAssociate:
    W = np.array([[1.0, 0.0], [0.0, 1.0]])

    def test_nearest_ray(self):
        a = associate(np.array([[0.9, 0.1]]), self.W, None)
        assert a.subspace_of.tolist() == [0]

    def test_tie_goes_to_lowest_index(self):
        assert associate(np.array([[0.5, 0.5]]), self.W, None).subspace_of.tolist() == [0]

    def test_empty_population(self):
        a = associate(np.empty((0, 2)), self.W, None)
        assert a.subspace_of.size == 0 and a.members == {} and a.counts.tolist() == [0, 0]

    def test_partition_and_oracle(self):
        r = np.random.default_rng(1)
        F = r.random((60, 3)) * [1, 2, 3]
        W = generate_weights(3, (6,))
        bounds = ObjectiveBounds(F.min(0), F.max(0))
        a = associate(F, W, bounds)
        assert a.subspace_of.tolist() == labels_of(F, W.vectors, bounds.ideal, bounds.nadir)
        flat = sorted(i for ms in a.members.values() for i in ms)
        assert flat == list(range(60)) and a.counts.sum() == 60


class TestTchebycheff:
    def test_at_ideal(self):
        assert tchebycheff(np.array([0.3, 0.4]), np.array([0.5, 0.5]), np.array([0.3, 0.4])) == 0.0

    def test_example(self):
        assert tchebycheff(np.array([0.2, 0.4]), np.array([0.5, 0.5]), np.zeros(2)) == pytest.approx(0.8)

    def test_zero_weight_is_guarded(self):
        v = tchebycheff(np.array([0.2, 0.4]), np.array([1.0, 0.0]), np.zeros(2))
        assert v == pytest.approx(0.4 / 1e-6)

    def test_broadcasts_over_rows(self):
        F = np.array([[0.2, 0.4], [0.4, 0.2]])
        assert np.allclose(tchebycheff(F, np.array([0.5, 0.5]), np.zeros(2)), [0.8, 0.8])

    @given(arrays(np.float64, 3, elements=unit), arrays(np.float64, 3, elements=unit), st.floats(-5, 5))
    def test_translation_invariance(self, f, z, c):
        w = np.array([0.2, 0.3, 0.5])
        assert tchebycheff(f + c, w, z + c) == pytest.approx(tchebycheff(f, w, z), abs=1e-9)


class TestOccupation:
    def test_full(self):
        assert occupation_rate(Association(np.arange(5), 5)) == 1.0

    def test_one_of_five(self):
        assert occupation_rate(Association(np.zeros(5, dtype=int), 5)) == pytest.approx(0.2)

    def test_three_of_three_hundred(self):
        assert occupation_rate(Association(np.array([0, 7, 7, 299]), 300)) == pytest.approx(0.01)

    def test_no_subspaces(self):
        assert occupation_rate(Association(np.zeros(0, dtype=int), 0)) == 0.0
