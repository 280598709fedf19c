"""Score fusion tests with hand-evaluated expected values."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shelfguide.color import HIST_SHAPE
from shelfguide.matching import (
    BandHistogramSet,
    DimensionMismatch,
    MatchConfig,
    ReferenceSet,
    ShapeMismatch,
    bhattacharyya,
    build_reference,
    color_similarity,
    cosine_similarity,
    fuse_scores,
    image_band_histograms,
    load_reference,
    match_detections,
    save_reference,
)


def unit_hist(bin_index=(0, 0, 0)):
    hist = np.zeros(HIST_SHAPE)
    hist[bin_index] = 1.0
    return hist


def random_unit_hist(rng):
    hist = rng.random(HIST_SHAPE)
    return hist / hist.sum()


def band_set(top, middle, bottom, counts=(10, 10, 10)):
    return BandHistogramSet(top, middle, bottom, counts)


class TestBhattacharyya:
    def test_identical_distributions_score_one(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            hist = random_unit_hist(rng)
            assert bhattacharyya(hist, hist) == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_supports_score_zero(self):
        assert bhattacharyya(unit_hist((0, 0, 0)), unit_hist((5, 5, 5))) == 0.0

    def test_two_bin_worked_example(self):
        # sum_i sqrt(c_i * r_i) = sqrt(0.5 * 1.0) + sqrt(0.5 * 0.0)
        c = np.array([0.5, 0.5])
        r = np.array([1.0, 0.0])
        assert bhattacharyya(c, r) == pytest.approx(math.sqrt(0.5), abs=1e-9)

    def test_all_zero_histogram_scores_zero(self):
        assert bhattacharyya(np.zeros(HIST_SHAPE), unit_hist()) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            bhattacharyya(np.ones(4) / 4, np.ones(5) / 5)

    def test_symmetry_and_range_over_random_histograms(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            c, r = random_unit_hist(rng), random_unit_hist(rng)
            s = bhattacharyya(c, r)
            assert 0.0 <= s <= 1.0
            assert s == pytest.approx(bhattacharyya(r, c), abs=1e-12)


class TestColorSimilarity:
    def test_perfect_match_all_bands(self):
        rng = np.random.default_rng(1)
        bands = band_set(*(random_unit_hist(rng) for _ in range(3)))
        s_color, per_band = color_similarity(bands, bands)
        assert s_color == pytest.approx(1.0, abs=1e-9)
        assert per_band == pytest.approx((1.0, 1.0, 1.0), abs=1e-9)

    def test_top_band_only_gives_its_weight(self):
        shared = unit_hist((3, 3, 3))
        crop = band_set(shared, unit_hist((0, 0, 0)), unit_hist((1, 1, 1)))
        ref = band_set(shared, unit_hist((9, 9, 9)), unit_hist((8, 8, 8)))
        s_color, per_band = color_similarity(crop, ref)
        assert per_band == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
        assert s_color == pytest.approx(0.3, abs=1e-12)

    def test_empty_band_weights_renormalize(self):
        shared_t, shared_b = unit_hist((1, 1, 1)), unit_hist((2, 2, 2))
        crop = band_set(shared_t, np.zeros(HIST_SHAPE), shared_b, counts=(10, 0, 10))
        ref = band_set(shared_t, unit_hist((5, 5, 5)), shared_b)
        s_color, _ = color_similarity(crop, ref)
        assert s_color == pytest.approx(1.0, abs=1e-12)

    def test_all_bands_empty_scores_zero(self):
        zeros = np.zeros(HIST_SHAPE)
        empty = band_set(zeros, zeros, zeros, counts=(0, 0, 0))
        s_color, _ = color_similarity(empty, empty)
        assert s_color == 0.0


class TestCosineAndFusion:
    def test_cosine_trivial_cases(self):
        a = np.zeros(8)
        a[0] = 1.0
        b = np.zeros(8)
        b[1] = 1.0
        assert cosine_similarity(a, a) == pytest.approx(1.0)
        assert cosine_similarity(a, b) == pytest.approx(0.0)
        assert cosine_similarity(a, -a) == pytest.approx(-1.0)

    def test_cosine_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity(np.ones(3), np.ones(4))

    def test_fusion_worked_examples(self):
        assert fuse_scores(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert fuse_scores(0.8, 0.5) == pytest.approx(0.71, abs=1e-12)
        assert fuse_scores(0.0, 1.0) == pytest.approx(0.30, abs=1e-12)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MatchConfig(w_top=0.5, w_mid=0.5, w_bot=0.5)

    @given(
        st.floats(min_value=-1, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
    )
    def test_fusion_stays_in_range(self, s_embed, s_color, alpha):
        cfg = MatchConfig(alpha=alpha)
        assert -1.0 - 1e-12 <= fuse_scores(s_embed, s_color, cfg) <= 1.0 + 1e-12


class _TableEmbedder:
    """Maps known crop fingerprints to fixed vectors for matcher tests."""

    def __init__(self, dim=16):
        self.dim = dim
        self.table = {}

    def register(self, crop, vector):
        self.table[crop.tobytes()] = np.asarray(vector, dtype=float)

    def __call__(self, image):
        key = image.tobytes()
        if key in self.table:
            return self.table[key]
        vec = np.zeros(self.dim)
        vec[-1] = 1.0
        return vec


def _crop(color, height=9, width=6):
    return np.full((height, width, 3), color, dtype=np.uint8)


def _unit(dim, idx, scale=1.0, other=None):
    vec = np.zeros(dim)
    vec[idx] = 1.0
    if other is not None:
        vec = scale * vec + (1 - scale) * other
        vec /= np.linalg.norm(vec)
    return vec


class TestMatchDetections:
    def _setup(self):
        dim = 16
        ref_crop = _crop((200, 30, 30))
        embedder = _TableEmbedder(dim)
        ref_vec = _unit(dim, 0)
        embedder.register(ref_crop, ref_vec)
        reference = ReferenceSet(
            embedding=ref_vec, bands=image_band_histograms(ref_crop)
        )
        return embedder, reference, ref_crop

    def test_identical_crop_scores_one(self):
        embedder, reference, ref_crop = self._setup()
        result = match_detections([(7, ref_crop)], reference, embedder)
        assert result is not None
        det_id, score = result
        assert det_id == 7
        assert score.s_embed == pytest.approx(1.0)
        assert score.s_color == pytest.approx(1.0, abs=1e-9)
        assert score.s_final == pytest.approx(1.0, abs=1e-9)

    def test_all_crops_gated_returns_none(self):
        embedder, reference, _ = self._setup()
        strangers = [(0, _crop((1, 2, 3))), (1, _crop((4, 5, 6)))]
        assert match_detections(strangers, reference, embedder) is None

    def test_empty_input_returns_none(self):
        embedder, reference, _ = self._setup()
        assert match_detections([], reference, embedder) is None

    def test_argmax_over_fused_scores(self):
        embedder, reference, ref_crop = self._setup()
        # Same color stats, weaker embedding: passes the gate but loses.
        weaker = _crop((200, 30, 30), height=12)
        embedder.register(weaker, _unit(16, 0, scale=0.8, other=_unit(16, 1)))
        result = match_detections([(0, weaker), (1, ref_crop)], reference, embedder)
        assert result is not None and result[0] == 1

    def test_order_invariance_and_tie_break(self):
        embedder, reference, ref_crop = self._setup()
        twin = ref_crop.copy()
        embedder.register(twin, reference.embedding)
        forward = match_detections([(2, ref_crop), (5, twin)], reference, embedder)
        backward = match_detections([(5, twin), (2, ref_crop)], reference, embedder)
        assert forward is not None and backward is not None
        assert forward[0] == backward[0] == 2  # lowest id wins the tie

    def test_raising_gate_never_changes_winner(self):
        embedder, reference, ref_crop = self._setup()
        weaker = _crop((200, 30, 30), height=12)
        embedder.register(weaker, _unit(16, 0, scale=0.8, other=_unit(16, 1)))
        crops = [(0, weaker), (1, ref_crop)]
        low = match_detections(crops, reference, embedder, MatchConfig(embed_gate=0.5))
        high = match_detections(crops, reference, embedder, MatchConfig(embed_gate=0.95))
        assert low is not None and high is not None
        assert low[0] == high[0]

    def test_tiny_crop_gets_zero_color_score(self):
        embedder, reference, _ = self._setup()
        sliver = _crop((200, 30, 30), height=2)
        embedder.register(sliver, reference.embedding)
        result = match_detections([(0, sliver)], reference, embedder)
        assert result is not None
        assert result[1].s_color == 0.0
        assert result[1].s_final == pytest.approx(0.7)


class TestReferenceSetIO:
    def test_build_reference_averages_embeddings(self):
        crops = [_crop((10, 10, 10)), _crop((20, 20, 20))]
        table = _TableEmbedder(4)
        table.register(crops[0], [1.0, 0.0, 0.0, 0.0])
        table.register(crops[1], [0.0, 1.0, 0.0, 0.0])
        ref = build_reference(crops, table)
        assert np.linalg.norm(ref.embedding) == pytest.approx(1.0)
        assert ref.embedding[0] == pytest.approx(ref.embedding[1])
        # histograms come from the first image
        first = image_band_histograms(crops[0])
        assert np.allclose(ref.bands.top, first.top)

    def test_reference_cache_round_trip(self, tmp_path):
        crop = _crop((120, 40, 220))
        table = _TableEmbedder(6)
        table.register(crop, np.ones(6) / math.sqrt(6))
        ref = build_reference([crop], table)
        path = tmp_path / "item.ref"
        save_reference(path, "400123", ref)
        barcode, loaded = load_reference(path)
        assert barcode == "400123"
        assert np.allclose(loaded.embedding, ref.embedding)
        assert np.allclose(loaded.bands.middle, ref.bands.middle)
        assert loaded.bands.pixel_counts == ref.bands.pixel_counts

    def test_reference_cache_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "not_a_ref.bin"
        path.write_bytes(b"something else entirely")
        with pytest.raises(ValueError):
            load_reference(path)
