"""Domain membership, discretization, and JSON descriptor checks."""

import math

import numpy as np
import pytest

from qtorsion import domains
from qtorsion.domains import (
    Ball,
    Box,
    Domain,
    EmptyInteriorError,
    GridField,
    Indicator,
    Interval,
    Polygon2D,
    contains,
    discretize,
    domain_from_json,
)


class TestContains:
    def test_ball_center_inside(self):
        assert contains(Ball((0.0, 0.0), 1.0), (0.0, 0.0))

    def test_ball_boundary_excluded(self):
        assert not contains(Ball((0.0, 0.0), 1.0), (1.0, 0.0))

    def test_interval_midpoint(self):
        assert contains(Interval(0.0, 1.0), (0.5,))
        assert not contains(Interval(0.0, 1.0), (0.0,))

    def test_box_strict(self):
        box = Box((0.0, 0.0), (1.0, 2.0))
        assert contains(box, (0.5, 1.9))
        assert not contains(box, (0.5, 2.0))

    def test_polygon_interior(self):
        tri = Polygon2D([(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)])
        assert contains(tri, (0.5, 0.3))
        assert not contains(tri, (0.0, 0.5))

    def test_indicator(self):
        dom = Indicator(
            lambda p: np.asarray(p)[..., 0] > 0.5, lo=(0.0, 0.0), hi=(1.0, 1.0)
        )
        assert contains(dom, (0.7, 0.5))
        assert not contains(dom, (0.3, 0.5))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            contains(Ball((0.0, 0.0), 1.0), (0.5,))


class TestValidation:
    def test_ball_radius_positive(self):
        with pytest.raises(ValueError):
            Ball((0.0,), 0.0)

    def test_interval_ordering(self):
        with pytest.raises(ValueError):
            Interval(1.0, 0.0)

    def test_box_ordering(self):
        with pytest.raises(ValueError):
            Box((0.0, 0.0), (1.0, 0.0))

    def test_polygon_needs_three_vertices(self):
        with pytest.raises(ValueError):
            Polygon2D([(0.0, 0.0), (1.0, 0.0)])

    def test_polygon_rejects_self_intersection(self):
        bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
        with pytest.raises(ValueError):
            Polygon2D(bowtie)


class TestDiscretize:
    def test_interval_node_count(self):
        grid = discretize(Interval(0.0, 1.0), 0.25)
        assert grid.n_interior == 3
        np.testing.assert_allclose(
            np.sort(grid.nodes[:, 0]), [0.25, 0.5, 0.75], atol=1e-12
        )

    def test_square_node_count(self):
        grid = discretize(Box((0.0, 0.0), (1.0, 1.0)), 0.25)
        assert grid.n_interior == 9

    def test_disc_half_spacing_enumeration(self):
        # frozen from direct lattice enumeration anchored at the
        # bounding-box corner (-1,-1): all nine |x| < 1 lattice points
        grid = discretize(Ball((0.0, 0.0), 1.0), 0.5)
        got = sorted(map(tuple, np.round(grid.nodes, 12)))
        want = sorted(
            (x, y)
            for x in (-0.5, 0.0, 0.5)
            for y in (-0.5, 0.0, 0.5)
        )
        assert got == want

    def test_empty_interior_raises(self):
        with pytest.raises(EmptyInteriorError):
            discretize(Ball((0.0, 0.0), 0.1), 0.5)

    def test_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            discretize(Interval(0.0, 1.0), 0.0)


class TestGridInvariants:
    @pytest.mark.parametrize(
        "domain,h",
        [
            (Interval(0.0, 1.0), 1 / 16),
            (Box((0.0, 0.0), (1.0, 1.0)), 1 / 8),
            (Ball((0.0, 0.0), 1.0), 1 / 8),
            (Polygon2D([(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]), 1 / 16),
            (Ball((0.0, 0.0, 0.0), 1.0), 1 / 6),
        ],
    )
    def test_nodes_strictly_inside(self, domain, h):
        grid = discretize(domain, h)
        assert bool(domain.mask(grid.nodes).all())

    def test_index_bijection(self):
        grid = discretize(Ball((0.0, 0.0), 1.0), 1 / 8)
        ids = [grid.index[tuple(m)] for m in grid.multi]
        assert sorted(ids) == list(range(grid.n_interior))

    def test_refinement_keeps_coarse_nodes(self):
        # halving h keeps the coarse lattice inside the fine lattice
        coarse = discretize(Ball((0.0, 0.0), 1.0), 1 / 8)
        fine = discretize(Ball((0.0, 0.0), 1.0), 1 / 16)
        fine_set = {tuple(p) for p in np.round(fine.nodes, 10)}
        for p in np.round(coarse.nodes, 10):
            assert tuple(p) in fine_set
        assert fine.n_interior >= coarse.n_interior

    @pytest.mark.parametrize(
        "domain,volume",
        [
            (Ball((0.0, 0.0), 1.0), math.pi),
            (Ball((0.0, 0.0, 0.0), 1.0), 4 * math.pi / 3),
        ],
    )
    def test_cell_volume_convergence(self, domain, volume):
        h = 1 / 64
        grid = discretize(domain, h)
        assert h**grid.domain.dim * grid.n_interior == pytest.approx(
            volume, rel=0.02
        )


class TestGridField:
    def test_sup(self):
        grid = discretize(Interval(0.0, 1.0), 0.25)
        field = GridField(grid, np.array([0.1, -0.7, 0.2]))
        assert field.sup() == pytest.approx(0.7)

    def test_length_mismatch_rejected(self):
        grid = discretize(Interval(0.0, 1.0), 0.25)
        with pytest.raises(ValueError):
            GridField(grid, np.zeros(4))

    def test_nonfinite_rejected(self):
        grid = discretize(Interval(0.0, 1.0), 0.25)
        with pytest.raises(ValueError):
            GridField(grid, np.array([0.0, np.nan, 0.0]))


class TestJsonDescriptors:
    @pytest.mark.parametrize(
        "obj,cls",
        [
            ({"shape": "interval", "a": 0.0, "b": 2.0}, Interval),
            ({"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 2.0]}, Box),
            ({"shape": "ball", "center": [0.0, 0.0], "radius": 1.5}, Ball),
            (
                {"shape": "polygon", "vertices": [[0, 0], [1, 0], [0.5, 1]]},
                Polygon2D,
            ),
        ],
    )
    def test_shapes_parse(self, obj, cls):
        dom = domain_from_json(obj)
        assert isinstance(dom, cls)
        assert isinstance(dom, Domain)

    def test_parsed_ball_geometry(self):
        dom = domain_from_json({"shape": "ball", "center": [1.0], "radius": 0.5})
        assert contains(dom, (1.2,))
        assert not contains(dom, (0.4,))

    def test_unknown_shape_rejected(self):
        with pytest.raises(ValueError):
            domain_from_json({"shape": "torus", "r": 1.0})

    def test_missing_shape_rejected(self):
        with pytest.raises(ValueError):
            domain_from_json({"radius": 1.0})

    def test_bad_parameter_rejected(self):
        with pytest.raises(ValueError):
            domain_from_json({"shape": "ball", "center": [0.0], "radius": -1.0})
