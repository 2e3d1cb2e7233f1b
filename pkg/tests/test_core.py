import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preflearn.core import Dataset, Embedding, LabeledExample, QueryPair, WeightVector, embed, invert, make_pair
from preflearn.errors import DomainError, NoPreimageError, UsageError


class TestWeightVector:
    def test_valid(self):
        w = WeightVector([0.3, 0.7])
        assert w.m == 2
        np.testing.assert_array_equal(np.asarray(w), [0.3, 0.7])

    def test_residue_clipped(self):
        w = WeightVector([1.0 + 5e-13, -5e-13])
        assert w.w[1] == 0.0

    @pytest.mark.parametrize("bad", [[1.0], [0.6, 0.6], [1.2, -0.2], [np.nan, 1.0]])
    def test_rejects(self, bad):
        with pytest.raises(DomainError):
            WeightVector(bad)

    def test_immutable(self):
        w = WeightVector([0.5, 0.5])
        with pytest.raises(ValueError):
            w.w[0] = 1.0


class TestEmbed:
    def test_identity(self):
        np.testing.assert_array_equal(embed(Embedding.identity(2), [0.3, 0.7]), [0.3, 0.7])

    def test_affine(self):
        e = Embedding.affine(0.5 * np.eye(2), [0.25, 0.25])
        np.testing.assert_allclose(embed(e, [0.5, 0.5]), [0.5, 0.5])

    def test_out_of_box(self):
        with pytest.raises(DomainError):
            embed(Embedding.identity(2), [1.5, 0.0])

    def test_affine_must_map_into_unit_cube(self):
        with pytest.raises(UsageError):
            Embedding.affine(2 * np.eye(2), [0, 0])

    def test_affine_needs_full_row_rank(self):
        with pytest.raises(UsageError):
            Embedding.affine([[0.5, 0.5], [0.5, 0.5]], [0, 0])


class TestInvert:
    def test_identity(self):
        np.testing.assert_array_equal(invert(Embedding.identity(2), [0.2, 0.8]), [0.2, 0.8])

    def test_affine(self):
        # 0.5 x + 0.25 = 0.5  =>  x = 0.5
        e = Embedding.affine(0.5 * np.eye(2), [0.25, 0.25])
        np.testing.assert_allclose(invert(e, [0.5, 0.5]), [0.5, 0.5])

    def test_no_preimage(self):
        with pytest.raises(NoPreimageError):
            invert(Embedding.identity(2), [2.0, 0.0])

    def test_affine_outside_image(self):
        e = Embedding.affine(0.5 * np.eye(2), [0.25, 0.25])
        with pytest.raises(NoPreimageError):
            invert(e, [0.9, 0.5])

    def test_wide_affine_round_trip(self, rng):
        # m=2 outputs from d=3 inputs; pseudo-inverse gives a preimage
        A = np.array([[0.2, 0.1, 0.1], [0.1, 0.3, 0.1]])
        e = Embedding.affine(A, [0.2, 0.2])
        for _ in range(100):
            x = rng.random(3)
            v = e.embed(x)
            assert np.max(np.abs(e.embed(e.invert(v)) - v)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_embed_invert_embed_round_trip(d, seed):
    rng = np.random.default_rng(seed)
    lower = rng.random(d) * 0.4
    upper = lower + 0.1 + rng.random(d) * (1 - lower - 0.1)
    A = np.diag(rng.uniform(0.2, 1.0, d))
    for e in (Embedding.identity(d, lower, upper), Embedding.affine(A, np.zeros(d), lower, upper)):
        x = lower + (upper - lower) * rng.random((1000, d))
        v = e.embed(x)
        back = np.array([e.embed(e.invert(row)) for row in v[:50]])
        np.testing.assert_allclose(back, v[:50], atol=1e-9, rtol=0)


class TestMakePair:
    @pytest.mark.parametrize(
        "x, xp, delta",
        [([0, 0], [0.4, 0.2], [0.4, 0.2]), ([0.5, 0.5], [0.5, 0.5], [0, 0]), ([1, 0], [0, 1], [-1, 1])],
    )
    def test_examples(self, x, xp, delta):
        pair = make_pair(Embedding.identity(2), x, xp)
        np.testing.assert_allclose(pair.delta, delta, atol=1e-12)

    def test_delta_in_unit_cube(self, rng):
        e = Embedding.identity(4)
        for _ in range(200):
            pair = make_pair(e, rng.random(4), rng.random(4))
            assert np.all(np.abs(pair.delta) <= 1)
            np.testing.assert_allclose(pair.delta, e.embed(pair.x_prime) - e.embed(pair.x), atol=1e-12)

    def test_propagates_embed_errors(self):
        with pytest.raises(DomainError):
            make_pair(Embedding.identity(2), [0, 0], [1.1, 0])

    def test_label_domain(self):
        pair = make_pair(Embedding.identity(2), [0, 0], [1, 1])
        with pytest.raises(DomainError):
            LabeledExample(pair, 2)


class TestDataset:
    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            Dataset.from_examples([])

    def test_examples_round_trip(self):
        e = Embedding.identity(2)
        exs = [LabeledExample(make_pair(e, [0, 0], [0.4, 0.2]), 1), LabeledExample(make_pair(e, [1, 0], [0, 1]), 0)]
        data = Dataset.from_examples(exs, {"distribution": "manual", "seed": 0})
        assert data.n == 2 and data.metadata["n"] == 2
        again = data.examples
        np.testing.assert_allclose(again[1].pair.delta, [-1, 1])
        assert [ex.y for ex in again] == [1, 0]

    def test_jsonl_round_trip(self, tmp_path, rng):
        e = Embedding.identity(3)
        data = Dataset.from_arrays(e, rng.random((5, 3)), rng.random((5, 3)), [1, 0, 1, 1, 0])
        path = tmp_path / "d.jsonl"
        data.write_jsonl(path)
        raw = path.read_bytes()
        assert b"\r\n" not in raw and raw.count(b"\n") == 5
        first = json.loads(raw.splitlines()[0])
        assert set(first) == {"x", "x_prime", "y"}
        back = Dataset.read_jsonl(path, e)
        np.testing.assert_array_equal(back.delta, data.delta)
        np.testing.assert_array_equal(back.y, data.y)

    def test_malformed_jsonl(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"x": [0, 0]}\n')
        with pytest.raises(UsageError):
            Dataset.read_jsonl(path, Embedding.identity(2))

    def test_second_moment(self):
        data = Dataset.from_deltas([[1, -1], [0.5, 0.5]], [1, 0])
        np.testing.assert_allclose(data.second_moment(), [[0.625, -0.375], [-0.375, 0.625]])


def test_embedding_config_round_trip():
    e = Embedding.affine(0.5 * np.eye(2), [0.25, 0.25])
    again = Embedding.from_config(json.loads(json.dumps(e.to_config())))
    np.testing.assert_array_equal(again.A, e.A)
    assert Embedding.from_config({"kind": "identity"}, m=3).output_dim == 3
    with pytest.raises(UsageError):
        Embedding.from_config({"kind": "spline"}, m=2)
