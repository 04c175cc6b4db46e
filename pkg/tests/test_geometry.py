"""Half-plane tiling geometry: maps, tiles, patches, occurrence bookkeeping,
and the agreement metric."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyptiling import (
    AffineMap,
    AnchoredTiling,
    CapError,
    DomainError,
    Occurrence,
    OccurrenceClass,
    Patch,
    SizeError,
    SubstitutionModel,
    TileAddress,
    ToeplitzModel,
    agreement_radius,
    alpha,
    doubling_map,
    enumerate_occurrences,
    hull_distance,
    identity_map,
    occurrence_classes,
    occurrence_table_json,
    patch_partition_check,
    shift_map,
    suspension_project,
    tile_containing_point,
    tile_region,
)

R = doubling_map()
S = shift_map()

dyadic_scale = st.integers(-8, 8).map(lambda k: Fraction(2) ** k)
dyadic_offset = st.integers(-64, 64).map(lambda n: Fraction(n, 16))


class TestAffineMaps:
    def test_generators(self):
        assert (R.a, R.b) == (2, 0)
        assert (S.a, S.b) == (1, 1)
        assert identity_map().apply((3.0, 4.0)) == (3.0, 4.0)

    def test_composition_order(self):
        rs = R.compose(S)  # z -> 2(z + 1)
        assert (rs.a, rs.b) == (2, 2)
        sr = S.compose(R)  # z -> 2z + 1
        assert (sr.a, sr.b) == (2, 1)
        assert R @ S == rs

    def test_apply_acts_on_both_coordinates(self):
        g = AffineMap(Fraction(1, 2), 3)
        assert g.apply((2, 4)) == (4, 2)

    def test_inverse_and_power(self):
        g = R.compose(S)
        gi = g.inverse()
        assert gi.compose(g) == identity_map()
        assert g.compose(gi) == identity_map()
        assert R.power(3) == AffineMap(8, 0)
        assert S.power(-2) == AffineMap(1, -2)
        assert g.power(0) == identity_map()

    def test_positive_dilation_required(self):
        with pytest.raises(DomainError):
            AffineMap(0, 1)
        with pytest.raises(DomainError):
            AffineMap(-2, 0)

    def test_alpha_values(self):
        assert alpha(R) == 2
        assert alpha(S) == 1
        assert alpha(identity_map()) == 1
        assert alpha(AffineMap(Fraction(3, 4), 5)) == Fraction(3, 4)

    @given(a1=dyadic_scale, b1=dyadic_offset, a2=dyadic_scale, b2=dyadic_offset)
    @settings(max_examples=50, deadline=None)
    def test_alpha_is_multiplicative(self, a1, b1, a2, b2):
        g, h = AffineMap(a1, b1), AffineMap(a2, b2)
        assert alpha(g.compose(h)) == alpha(g) * alpha(h)

    @given(a=dyadic_scale, b=dyadic_offset, n=st.integers(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_power_matches_repeated_composition(self, a, b, n):
        g = AffineMap(a, b)
        expected = identity_map()
        step = g if n >= 0 else g.inverse()
        for _ in range(abs(n)):
            expected = step.compose(expected)
        assert g.power(n) == expected


class TestTiles:
    def test_prototile_vertices(self):
        assert TileAddress(0, 0).vertices() == (
            (0, 1), (Fraction(1, 2), 1), (1, 1), (1, 2), (0, 2),
        )

    def test_neighbor_vertices(self):
        assert TileAddress(1, 0).vertices() == (
            (0, 2), (1, 2), (2, 2), (2, 4), (0, 4),
        )
        assert TileAddress(0, 1).vertices() == (
            (1, 1), (Fraction(3, 2), 1), (2, 1), (2, 2), (1, 2),
        )
        assert tile_region(TileAddress(0, 1)) == TileAddress(0, 1).vertices()

    def test_region_uses_exact_arithmetic(self):
        x0, x1, y0, y1 = TileAddress(-3, 5).region()
        assert (x0, x1, y0, y1) == (
            Fraction(5, 8), Fraction(6, 8), Fraction(1, 8), Fraction(1, 4),
        )

    def test_map_from_prototile(self):
        g = TileAddress(1, 3).map_from_prototile()
        assert (g.a, g.b) == (2, 6)
        base = TileAddress(0, 0).vertices()
        assert tuple(g.apply(v) for v in base) == TileAddress(1, 3).vertices()

    def test_containing_point_examples(self):
        assert tile_containing_point(0.5, 1.5) == TileAddress(0, 0)
        assert tile_containing_point(3.9, 1.0) == TileAddress(0, 3)
        assert tile_containing_point(0.1, 0.7) == TileAddress(-1, 0)
        assert tile_containing_point(5.0, 4.0) == TileAddress(2, 1)
        assert tile_containing_point(-0.1, 1.0) == TileAddress(0, -1)

    def test_containing_point_domain(self):
        for bad in (0.0, -1.0, float("nan"), float("inf")):
            with pytest.raises(DomainError):
                tile_containing_point(0.0, bad)
        with pytest.raises(DomainError):
            tile_containing_point(float("nan"), 1.0)

    @given(row=st.integers(-20, 20), col=st.integers(-1000, 1000),
           fx=st.floats(0.0, 0.999), fy=st.floats(0.0, 0.999))
    @settings(max_examples=80, deadline=None)
    def test_containing_point_roundtrip(self, row, col, fx, fy):
        h = math.ldexp(1.0, row)
        x = (col + fx) * h
        y = (1.0 + fy) * h
        assert tile_containing_point(x, y) == TileAddress(row, col)


class TestPatches:
    def test_small_patch(self):
        patch = Patch(word=(1, 2), apex=TileAddress(2, 1))
        assert patch.depth == 2
        assert patch.tile_count() == 3
        tiles = list(patch.tiles())
        assert tiles == [
            (TileAddress(2, 1), 1),
            (TileAddress(1, 2), 2),
            (TileAddress(1, 3), 2),
        ]
        assert patch.region() == (4, 8, 2, 8)

    def test_tile_count_matches_enumeration(self):
        patch = Patch(word=(1, 2, 1, 2, 2), apex=TileAddress(0, -3))
        tiles = list(patch.tiles())
        assert len(tiles) == patch.tile_count() == 31
        assert len({t for t, _ in tiles}) == 31  # no repeats

    def test_rows_shrink_downward(self):
        patch = Patch(word=(1, 1, 1), apex=TileAddress(5, 2))
        rows = [t.row for t, _ in patch.tiles()]
        assert rows == [5, 4, 4, 3, 3, 3, 3]

    def test_empty_word_rejected(self):
        with pytest.raises(DomainError):
            Patch(word=(), apex=TileAddress(0, 0))

    def test_tiles_cover_region_exactly(self):
        patch = Patch(word=(2, 1, 2, 1), apex=TileAddress(3, 0))
        x0, x1, y0, y1 = patch.region()
        area = sum(
            (r[1] - r[0]) * (r[3] - r[2])
            for r in (t.region() for t, _ in patch.tiles())
        )
        assert area == (x1 - x0) * (y1 - y0)


class TestOccurrences:
    def test_substitution_classes(self):
        sub = SubstitutionModel.standard()
        classes = occurrence_classes(sub, 1, 1)
        assert [(c.depth, c.count, c.child_letter) for c in classes] == [
            (0, 1, 1), (3, 8, 1), (6, 64, 2),
        ]

    def test_toeplitz_classes(self):
        t2 = ToeplitzModel.of_rank(2)
        classes = occurrence_classes(t2, 1, 1)
        assert [(c.depth, c.count, c.child_letter) for c in classes] == [
            (0, 1, 2), (3, 8, 1), (6, 64, 2),
        ]

    def test_level_zero_parent(self):
        sub = SubstitutionModel.standard()
        classes = occurrence_classes(sub, 0, 2)
        assert [(c.depth, c.count, c.child_letter) for c in classes] == [
            (0, 1, 1), (1, 2, 2), (2, 4, 2),
        ]

    @pytest.mark.parametrize("model_key", ["t2", "t3", "sub"])
    @pytest.mark.parametrize("q", [0, 1, 2])
    def test_tile_count_completeness(self, model_key, q):
        model = {
            "t2": ToeplitzModel.of_rank(2),
            "t3": ToeplitzModel.of_rank(3),
            "sub": SubstitutionModel.standard(),
        }[model_key]
        lq = model.level_length(q)
        lq1 = model.level_length(q + 1)
        for parent in range(1, model.r + 1):
            classes = occurrence_classes(model, q, parent)
            total = sum(c.count * (2**lq - 1) for c in classes)
            assert total == 2**lq1 - 1

    def test_placement_weights_exact(self):
        t3 = ToeplitzModel.of_rank(3)
        for c in occurrence_classes(t3, 1, 2):
            for h in (0, c.count - 1):
                assert alpha(c.placement_map(h)) == Fraction(1, 2**c.depth)
        with pytest.raises(DomainError):
            occurrence_classes(t3, 1, 2)[0].placement_map(1)

    def test_enumerate_respects_budget(self):
        sub = SubstitutionModel.standard()
        explicit = enumerate_occurrences(sub, 1, 1, budget=100)
        assert all(isinstance(o, Occurrence) for o in explicit)
        assert len(explicit) == 73
        compressed = enumerate_occurrences(sub, 1, 1, budget=10)
        assert all(isinstance(c, OccurrenceClass) for c in compressed)
        assert sum(c.count for c in compressed) == 73

    def test_explicit_placements_match_classes(self):
        sub = SubstitutionModel.standard()
        explicit = enumerate_occurrences(sub, 0, 1, budget=100)
        classes = occurrence_classes(sub, 0, 1)
        by_depth = {}
        for o in explicit:
            by_depth.setdefault(o.depth, []).append(o)
        for c in classes:
            group = by_depth[c.depth]
            assert len(group) == c.count
            assert {o.horizontal for o in group} == set(range(c.count))
            assert all(o.child_letter == c.child_letter for o in group)
            assert group[1].placement_map() == c.placement_map(1) if c.count > 1 else True

    def test_table_json_shape(self):
        t2 = ToeplitzModel.of_rank(2)
        table = occurrence_table_json(t2, 1, 2)
        assert table["q"] == 2 and table["parent"] == 2
        assert table["classes"][1] == {"d": 3, "count": "8", "child": 2}

    def test_class_cap(self):
        t2 = ToeplitzModel.of_rank(2)
        with pytest.raises(SizeError):
            occurrence_classes(t2, 3, 1, max_classes=10)


class TestPartition:
    @pytest.mark.parametrize("depth", [1, 2, 3, 6, 12])
    def test_single_apex_exact(self, depth):
        report = patch_partition_check(0, range(0, 1), depth)
        assert report["exact"]
        assert report["tiles"] == 2**depth - 1
        assert report["doubly_covered"] == report["uncovered"] == 0

    def test_multiple_apexes_exact(self):
        report = patch_partition_check(4, range(-3, 5), 5)
        assert report["exact"]
        assert report["tiles"] == 8 * (2**5 - 1)

    def test_depth_must_be_positive(self):
        with pytest.raises(DomainError):
            patch_partition_check(0, range(0, 1), 0)


class TestSuspension:
    def test_examples(self):
        assert suspension_project(identity_map()) == (0.0, 0)
        assert suspension_project(R) == (0.0, 1)
        frac, shift = suspension_project(AffineMap(3, 0))
        assert shift == 1
        assert frac == pytest.approx(math.log2(3) - 1)

    def test_translation_part_ignored(self):
        assert suspension_project(AffineMap(4, 17)) == (0.0, 2)

    def test_negative_shift(self):
        frac, shift = suspension_project(AffineMap(Fraction(3, 8), 0))
        assert shift == -2
        assert frac == pytest.approx(math.log2(3) - 1)

    def test_model_argument_validated(self):
        assert suspension_project(R, ToeplitzModel.of_rank(2)) == (0.0, 1)
        with pytest.raises(DomainError):
            suspension_project(R, "not a model")

    @given(k=st.integers(-30, 30))
    @settings(max_examples=30, deadline=None)
    def test_powers_of_two_are_exact(self, k):
        assert suspension_project(AffineMap(Fraction(2) ** k, 0)) == (0.0, k)


class TestAgreement:
    def setup_method(self):
        self.t2 = ToeplitzModel.of_rank(2)

    def test_identical_tilings(self):
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(self.t2, identity_map())
        assert agreement_radius(a, b) == math.inf
        assert hull_distance(a, b) == 0.0

    def test_incommensurate_scales(self):
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(self.t2, AffineMap(3, 0))
        assert agreement_radius(a, b) == 0.0
        assert hull_distance(a, b) == 1.0

    def test_offset_breaks_fine_rows(self):
        # shifting by 1 keeps every grid at spacing >= 1 aligned; the first
        # mismatch is the spacing-2 row, one band above the base point
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(self.t2, AffineMap(1, 1))
        assert agreement_radius(a, b) == pytest.approx(math.log(2))
        assert hull_distance(a, b) == 1.0

    def test_large_dyadic_offset(self):
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(self.t2, AffineMap(1, 32))
        rho = agreement_radius(a, b)
        assert rho == pytest.approx(6 * math.log(2))
        assert hull_distance(a, b) == pytest.approx(1 / rho)

    def test_color_mismatch_after_rescaling(self):
        # doubling the anchor slides the decoration one band: letters 1 and 2
        # disagree in the band containing the base point
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(self.t2, AffineMap(2, 0))
        assert agreement_radius(a, b) == 0.0

    def test_cross_rank_color_mismatch(self):
        # ranks 2 and 3 first differ where the third filling step acts; the
        # nearest such band to the base point sets the radius
        t3 = ToeplitzModel.of_rank(3)
        a = AnchoredTiling(self.t2, identity_map())
        b = AnchoredTiling(t3, identity_map())
        def band_dist(q):
            if 2.0**q <= 1 <= 2.0 ** (q + 1):
                return 0.0
            return min(abs(q), abs(q + 1)) * math.log(2)

        nearest = min(
            band_dist(q)
            for q in range(-40, 40)
            if self.t2.letter(q) != t3.letter(q)
        )
        assert agreement_radius(a, b) == pytest.approx(nearest)

    def test_periodic_rank_one_saturates_scan(self):
        # a constant decoration shifted by 2**65 agrees on every band the
        # default scan reaches; that must surface as a cap, not a guess
        t1 = ToeplitzModel.of_rank(1)
        a = AnchoredTiling(t1, identity_map())
        b = AnchoredTiling(t1, AffineMap(1, Fraction(2) ** 65))
        with pytest.raises(CapError):
            agreement_radius(a, b)
        with pytest.raises(CapError):
            hull_distance(a, b)
        # widening the scan finds the first broken grid row
        rho = agreement_radius(a, b, max_band_offset=80)
        assert rho == pytest.approx(66 * math.log(2))
