"""Tests for interfaces, rays and signed distances."""

import math

import numpy as np
import pytest

from bioinverse.errors import ConfigError, DegenerateNormal, InvalidGeometry, NoIntersection
from bioinverse.geometry import (
    InterfaceCurve,
    MeasurementRay,
    default_max_length,
    intersect_ray_curve,
    measure,
    normal_rays,
    read_curve_csv,
    read_rays_csv,
    signed_distance,
    write_curve_csv,
    write_rays_csv,
)


def brute_force_hits(ray, curve, samples=257, bisections=80):
    """Ray-line crossings found by dense sampling and bisection on each segment."""
    starts, ends = curve.segments
    o, d = ray.origin, ray.direction
    hits = []
    s = np.linspace(0.0, 1.0, samples)
    for a, b in zip(starts, ends):
        points = a[None, :] + s[:, None] * (b - a)[None, :]
        rel = points - o
        side = d[0] * rel[:, 1] - d[1] * rel[:, 0]
        for j in range(samples - 1):
            if side[j] == 0.0:
                lo = hi = s[j]
            elif side[j] * side[j + 1] < 0.0:
                lo, hi = s[j], s[j + 1]
                f_lo = side[j]
                for _ in range(bisections):
                    mid = 0.5 * (lo + hi)
                    p = a + mid * (b - a) - o
                    f_mid = d[0] * p[1] - d[1] * p[0]
                    if f_mid == 0.0:
                        lo = hi = mid
                        break
                    if (f_mid < 0.0) == (f_lo < 0.0):
                        lo, f_lo = mid, f_mid
                    else:
                        hi = mid
            else:
                continue
            p = a + 0.5 * (lo + hi) * (b - a)
            t = float(np.dot(p - o, d))
            if abs(t) <= ray.max_length:
                hits.append(t)
        if side[-1] == 0.0:
            t = float(np.dot(b - o, d))
            if abs(t) <= ray.max_length:
                hits.append(t)
    return hits


def brute_force_distance(ray, curve):
    hits = brute_force_hits(ray, curve)
    return min(hits, key=lambda t: (abs(t), t)) if hits else None


@pytest.fixture
def horizontal_chain():
    """Horizontal interface y = 0 traversed left to right, biofilm below."""
    x = np.linspace(-1.0, 1.0, 9)
    return InterfaceCurve(np.column_stack([x, np.zeros_like(x)]))


def semicircle(n, radius=1.0):
    angles = np.linspace(np.pi, 0.0, n)
    return InterfaceCurve(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))


class TestInterfaceCurve:
    """Test InterfaceCurve invariants."""

    def test_basic_creation(self):
        """Test creating an open curve."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        assert len(curve) == 3
        assert curve.n_segments == 2
        assert curve.closed is False
        assert curve.biofilm_side == "right"

    def test_closed_curve_segments(self):
        """Test a closed curve has a closing segment."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], closed=True)
        starts, ends = curve.segments
        assert curve.n_segments == 3
        assert np.array_equal(ends[-1], starts[0])

    def test_too_few_vertices(self):
        """Test a single vertex is rejected."""
        with pytest.raises(InvalidGeometry, match="at least 2"):
            InterfaceCurve([[0.0, 0.0]])

    def test_repeated_vertex_rejected(self):
        """Test zero-length segments are rejected."""
        with pytest.raises(InvalidGeometry, match="coincide"):
            InterfaceCurve([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])

    def test_non_finite_rejected(self):
        """Test NaN coordinates are rejected."""
        with pytest.raises(InvalidGeometry, match="finite"):
            InterfaceCurve([[0.0, 0.0], [np.nan, 1.0]])

    def test_vertices_read_only(self):
        """Test vertices cannot be mutated in place."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            curve.vertices[0, 0] = 5.0

    def test_translated(self):
        """Test translation keeps orientation."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0]], biofilm_side="left")
        moved = curve.translated([0.0, 2.0])
        assert moved.biofilm_side == "left"
        assert np.allclose(moved.vertices[:, 1], 2.0)

    def test_default_max_length_is_diagonal(self):
        """Test default search length is the bounding-box diagonal."""
        curve = InterfaceCurve([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]])
        assert default_max_length(curve) == pytest.approx(5.0)


class TestMeasurementRay:
    """Test MeasurementRay invariants."""

    def test_unit_direction_required(self):
        """Test non-unit directions are rejected."""
        with pytest.raises(InvalidGeometry, match="unit"):
            MeasurementRay([0.0, 0.0], [1.0, 1.0], 1.0)

    def test_from_direction_normalizes(self):
        """Test from_direction normalizes the direction."""
        ray = MeasurementRay.from_direction([0.0, 0.0], [3.0, 4.0], 1.0)
        assert ray.direction == pytest.approx([0.6, 0.8])

    def test_positive_length_required(self):
        """Test max_length must be positive."""
        with pytest.raises(InvalidGeometry, match="positive"):
            MeasurementRay([0.0, 0.0], [1.0, 0.0], 0.0)


class TestIntersectRayCurve:
    """Test ray/curve intersection."""

    def test_axis_aligned_crossing(self):
        """Test a single vertical segment crossed by a horizontal ray."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 10.0)
        curve = InterfaceCurve([[2.0, -1.0], [2.0, 1.0]])
        assert intersect_ray_curve(ray, curve) == [2.0]

    def test_bidirectional_search(self):
        """Test hits behind the origin are reported with negative t."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 10.0)
        curve = InterfaceCurve([[2.0, -1.0], [2.0, 1.0], [-3.0, 1.0], [-3.0, -1.0]])
        assert sorted(intersect_ray_curve(ray, curve)) == [-3.0, 2.0]

    def test_clipped_to_max_length(self):
        """Test hits beyond max_length are ignored."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 2.5)
        curve = InterfaceCurve([[2.0, -1.0], [2.0, 1.0], [-3.0, 1.0], [-3.0, -1.0]])
        assert intersect_ray_curve(ray, curve) == [2.0]

    def test_shared_vertex_counted_once(self):
        """Test a ray through a shared vertex yields one hit."""
        ray = MeasurementRay([0.0, -1.0], [0.0, 1.0], 5.0)
        curve = InterfaceCurve([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        assert intersect_ray_curve(ray, curve) == [1.0]

    def test_miss_returns_empty(self):
        """Test a miss is an empty list."""
        ray = MeasurementRay([0.0, 5.0], [1.0, 0.0], 10.0)
        curve = InterfaceCurve([[2.0, -1.0], [2.0, 1.0]])
        assert intersect_ray_curve(ray, curve) == []

    def test_parallel_segment_ignored(self):
        """Test segments parallel to the ray are not hits."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 10.0)
        curve = InterfaceCurve([[1.0, 0.5], [3.0, 0.5]])
        assert intersect_ray_curve(ray, curve) == []

    def test_dense_circle_matches_oracle(self):
        """Test a 720-vertex circle against the brute-force oracle."""
        angles = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        circle = InterfaceCurve(np.column_stack([np.cos(angles), np.sin(angles)]), closed=True)
        ray = MeasurementRay(
            [0.5, 0.5], [math.cos(math.radians(30.0)), math.sin(math.radians(30.0))], 5.0
        )
        ours = sorted(intersect_ray_curve(ray, circle))
        oracle = sorted(brute_force_hits(ray, circle))
        assert len(ours) == len(oracle) == 2
        assert np.allclose(ours, oracle, atol=1e-9, rtol=0.0)


class TestSignedDistance:
    """Test the minimal-magnitude selection rule."""

    def test_single_intersection(self):
        """Test a single hit is returned as is."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 1.0)
        curve = InterfaceCurve([[0.2, -1.0], [0.2, 1.0]])
        assert signed_distance(ray, curve) == pytest.approx(0.2)

    def test_minimal_magnitude(self):
        """Test the hit of minimal |t| wins over a closer positive one."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 1.0)
        curve = InterfaceCurve([[-0.1, -1.0], [-0.1, 1.0], [0.3, 1.0], [0.3, -1.0]])
        assert signed_distance(ray, curve) == pytest.approx(-0.1)

    def test_tie_resolves_negative(self):
        """Test equal magnitudes resolve toward the negative value."""
        ray = MeasurementRay([0.0, 0.0], [1.0, 0.0], 1.0)
        curve = InterfaceCurve([[-0.2, -1.0], [-0.2, 1.0], [0.2, 1.0], [0.2, -1.0]])
        assert signed_distance(ray, curve) == -0.2
        assert brute_force_distance(ray, curve) == pytest.approx(-0.2, abs=1e-12)

    def test_no_intersection_raises(self):
        """Test a miss raises NoIntersection."""
        ray = MeasurementRay([0.0, 5.0], [1.0, 0.0], 1.0)
        curve = InterfaceCurve([[0.2, -1.0], [0.2, 1.0]])
        with pytest.raises(NoIntersection):
            signed_distance(ray, curve)

    def test_reversed_direction_negates_symmetric_case(self):
        """Test reversing a ray negates a single-hit distance."""
        ray = MeasurementRay([0.0, 0.0], [0.0, -1.0], 1.0)
        curve = InterfaceCurve([[-1.0, -0.3], [1.0, -0.3]])
        assert signed_distance(ray, curve) == pytest.approx(0.3)
        assert signed_distance(ray.reversed(), curve) == pytest.approx(-0.3)

    def test_randomized_against_oracle(self):
        """Test 1000 random ray/polyline pairs against the brute-force oracle."""
        rng = np.random.default_rng(20240917)
        compared = 0
        for _ in range(1000):
            vertices = rng.uniform(-1.0, 1.0, size=(6, 2))
            curve = InterfaceCurve(vertices)
            angle = rng.uniform(0.0, 2.0 * np.pi)
            ray = MeasurementRay(
                rng.uniform(-0.5, 0.5, size=2), [np.cos(angle), np.sin(angle)], 2.0
            )
            expected = brute_force_distance(ray, curve)
            if expected is None:
                with pytest.raises(NoIntersection):
                    signed_distance(ray, curve)
                continue
            assert signed_distance(ray, curve) == pytest.approx(expected, abs=1e-9)
            compared += 1
        assert compared > 300


class TestMeasure:
    """Test residual vectors over ray sets."""

    def test_identity_is_zero(self):
        """Test rays originating on the curve measure zero."""
        curve = semicircle(41, radius=0.3)
        rays = normal_rays(curve)
        assert np.array_equal(measure(rays, curve), np.zeros(len(rays)))

    def test_rigid_offset_along_rays(self, horizontal_chain):
        """Test a curve shifted along every ray by 0.05 mm."""
        rays = normal_rays(horizontal_chain, vertex_indices=range(8))
        assert all(np.allclose(ray.direction, [0.0, -1.0]) for ray in rays)
        shifted = horizontal_chain.translated([0.0, -0.05])
        assert np.allclose(measure(rays, shifted), 0.05, atol=1e-15)

    def test_translation_equivariance(self):
        """Test translating along one ray shifts that residual by the offset."""
        curve = semicircle(61, radius=0.3)
        rays = normal_rays(curve, vertex_indices=[30])
        delta = 0.013
        moved = curve.translated(delta * rays[0].direction)
        assert measure(rays, moved)[0] == pytest.approx(delta, abs=1e-12)

    def test_matches_per_ray_oracle(self):
        """Test measure on random polyline pairs against the per-ray oracle."""
        rng = np.random.default_rng(7)
        x = np.linspace(-1.0, 1.0, 12)
        observed = InterfaceCurve(np.column_stack([x, 0.05 * rng.standard_normal(12)]))
        model = InterfaceCurve(np.column_stack([x, 0.05 * rng.standard_normal(12)]))
        rays = normal_rays(observed, vertex_indices=range(1, 11), max_length=1.0)
        expected = [brute_force_distance(ray, model) for ray in rays]
        assert None not in expected
        assert np.allclose(measure(rays, model), expected, atol=1e-9)

    def test_reports_first_failing_ray(self):
        """Test NoIntersection names the first failing ray."""
        curve = InterfaceCurve([[-1.0, 0.0], [1.0, 0.0]])
        rays = [
            MeasurementRay([0.0, 0.5], [0.0, -1.0], 1.0),
            MeasurementRay([5.0, 0.5], [0.0, -1.0], 1.0),
            MeasurementRay([6.0, 0.5], [0.0, -1.0], 1.0),
        ]
        with pytest.raises(NoIntersection) as exc_info:
            measure(rays, curve)
        assert exc_info.value.ray_index == 1

    def test_empty_ray_list(self, horizontal_chain):
        """Test an empty ray list is rejected."""
        with pytest.raises(InvalidGeometry):
            measure([], horizontal_chain)


class TestNormalRays:
    """Test normal ray construction."""

    def test_horizontal_biofilm_below(self, horizontal_chain):
        """Test rays on a horizontal chain point down into the biofilm."""
        rays = normal_rays(horizontal_chain)
        for ray in rays:
            assert ray.direction == pytest.approx([0.0, -1.0])

    def test_into_fluid_flips(self, horizontal_chain):
        """Test into_biofilm=False points into the fluid."""
        rays = normal_rays(horizontal_chain, into_biofilm=False)
        assert rays[0].direction == pytest.approx([0.0, 1.0])

    def test_left_orientation(self):
        """Test biofilm on the left of traversal."""
        curve = InterfaceCurve([[-1.0, 0.0], [1.0, 0.0]], biofilm_side="left")
        assert normal_rays(curve)[0].direction == pytest.approx([0.0, 1.0])

    def test_three_vertex_semicircle_apex(self):
        """Test the apex of a 3-vertex semicircle points at the center."""
        curve = semicircle(3)
        ray = normal_rays(curve, vertex_indices=[1])[0]
        assert ray.direction == pytest.approx([0.0, -1.0], abs=1e-12)

    def test_semicircle_normals_point_to_center(self):
        """Test interior vertex normals match exact inward circle normals."""
        curve = semicircle(181)
        indices = [45, 90, 135]
        for index, ray in zip(indices, normal_rays(curve, vertex_indices=indices)):
            exact = -curve.vertices[index] / np.linalg.norm(curve.vertices[index])
            assert np.allclose(ray.direction, exact, atol=1e-6)

    def test_index_out_of_range(self, horizontal_chain):
        """Test invalid indices raise."""
        with pytest.raises(InvalidGeometry, match="out of range"):
            normal_rays(horizontal_chain, vertex_indices=[0, 99])

    def test_antiparallel_segments(self):
        """Test a hairpin vertex raises DegenerateNormal."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DegenerateNormal):
            normal_rays(curve, vertex_indices=[1])

    def test_hairpin_outside_selection(self):
        """Test a hairpin vertex only matters when it is measured at."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, -1.0]])
        ray = normal_rays(curve, vertex_indices=[3])[0]
        assert ray.direction == pytest.approx([-1.0, 0.0])
        with pytest.raises(DegenerateNormal) as exc_info:
            curve.vertex_normals()
        assert exc_info.value.vertex == 1

    def test_directions_are_vertex_normals(self):
        """Test ray directions equal the curve's vertex normals at the selection."""
        curve = semicircle(31)
        indices = [0, 7, 15, 30]
        rays = normal_rays(curve, vertex_indices=indices, into_biofilm=False)
        expected = curve.vertex_normals(into_biofilm=False)[indices]
        assert np.allclose([ray.direction for ray in rays], expected)
        assert np.allclose(curve.vertex_normals(indices=indices), -expected)

    def test_default_max_length(self, horizontal_chain):
        """Test the default search length is the curve diagonal."""
        assert normal_rays(horizontal_chain)[0].max_length == pytest.approx(2.0)


class TestCurveFiles:
    """Test reading and writing curve and ray tables."""

    def test_curve_with_sidecar(self, tmp_path):
        """Test that topology and orientation survive a write and read."""
        curve = InterfaceCurve([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]], True, "left")
        read = read_curve_csv(write_curve_csv(curve, tmp_path / "c.csv"))
        assert np.array_equal(read.vertices, curve.vertices)
        assert read.closed
        assert read.biofilm_side == "left"

    def test_curve_without_sidecar(self, tmp_path):
        """Test defaults when no descriptor sits next to the table."""
        path = tmp_path / "c.csv"
        path.write_text("x_mm,y_mm\n0,0\n1,0.5\n")
        curve = read_curve_csv(path)
        assert not curve.closed
        assert curve.biofilm_side == "right"

    @pytest.mark.parametrize(
        "rows, match",
        [
            ("0,0\n1,abc\n", "Invalid curve row 3"),
            ("0,0\n1\n", "Invalid curve row 3"),
            ("0,0,0\n1,0\n", "Invalid curve row 2"),
        ],
    )
    def test_malformed_curve_row(self, tmp_path, rows, match):
        """Test that bad numbers or column counts are configuration errors."""
        path = tmp_path / "c.csv"
        path.write_text("x_mm,y_mm\n" + rows)
        with pytest.raises(ConfigError, match=match):
            read_curve_csv(path)

    def test_malformed_sidecar(self, tmp_path):
        """Test that an unreadable descriptor is a configuration error."""
        path = tmp_path / "c.csv"
        path.write_text("x_mm,y_mm\n0,0\n1,0\n")
        (tmp_path / "c.json").write_text("{")
        with pytest.raises(ConfigError, match="Invalid curve descriptor"):
            read_curve_csv(path)

    def test_missing_curve(self, tmp_path):
        """Test a missing file."""
        with pytest.raises(ConfigError, match="not found"):
            read_curve_csv(tmp_path / "absent.csv")

    def test_rays(self, tmp_path):
        """Test that rays are read back with their search lengths."""
        rays = [
            MeasurementRay([0.0, 1.0], [0.0, -1.0], 2.0),
            MeasurementRay([1.0, 1.0], [1.0, 0.0], 0.5),
        ]
        read = read_rays_csv(write_rays_csv(rays, tmp_path / "r.csv"))
        assert [r.max_length for r in read] == [2.0, 0.5]
        assert np.array_equal(read[1].direction, [1.0, 0.0])

    @pytest.mark.parametrize(
        "row",
        ["0,0,1,0,nan?", "0,0,1,0", "0,0,1,0,1,1"],
    )
    def test_malformed_ray_row(self, tmp_path, row):
        """Test that bad numbers or column counts are configuration errors."""
        path = tmp_path / "r.csv"
        path.write_text("ox_mm,oy_mm,dx,dy,max_length_mm\n0,0,0,-1,1\n" + row + "\n")
        with pytest.raises(ConfigError, match="Invalid ray row 3"):
            read_rays_csv(path)

    def test_wrong_ray_header(self, tmp_path):
        """Test the header check."""
        path = tmp_path / "r.csv"
        path.write_text("x,y\n0,0\n")
        with pytest.raises(ConfigError, match="must start with header"):
            read_rays_csv(path)
