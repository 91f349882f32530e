import math

import numpy as np
import pytest

from ntnopt.constellation import (
    EARTH_RADIUS_M,
    SPEED_OF_LIGHT_M_S,
    GeoPoint,
    GnbVisibilityError,
    LinkKind,
    WalkerParams,
    build_topology,
    elevation_deg,
    link_latency,
    nearest_visible_satellite,
    propagate_walker,
)

ORBIT_RADIUS = EARTH_RADIUS_M + 1000e3


def paper_walker(**kw):
    defaults = dict(num_planes=6, sats_per_plane=15, altitude_m=1000e3, inclination_deg=90.0)
    defaults.update(kw)
    return WalkerParams(**defaults)


class TestPropagateWalker:
    def test_paper_constellation_has_90_positions(self):
        assert propagate_walker(paper_walker()).shape == (90, 3)

    def test_degenerate_single_satellite_at_raan_reference(self):
        pos = propagate_walker(WalkerParams(1, 1, 1000e3, 90.0, phase_offset_deg=0.0))
        np.testing.assert_allclose(pos[0], [ORBIT_RADIUS, 0.0, 0.0], atol=1e-6)

    def test_all_positions_on_orbit_sphere(self):
        pos = propagate_walker(paper_walker(epoch_s=1234.5))
        radii = np.linalg.norm(pos, axis=1)
        np.testing.assert_allclose(radii, ORBIT_RADIUS, rtol=1e-6)

    def test_invalid_counts_rejected(self):
        with pytest.raises(ValueError):
            WalkerParams(0, 15, 1000e3, 90.0)
        with pytest.raises(ValueError):
            WalkerParams(6, 0, 1000e3, 90.0)

    def test_epoch_advances_along_plane(self):
        p0 = propagate_walker(paper_walker())
        p1 = propagate_walker(paper_walker(epoch_s=60.0))
        assert not np.allclose(p0, p1)
        np.testing.assert_allclose(np.linalg.norm(p1, axis=1), ORBIT_RADIUS, rtol=1e-9)


class TestLinkLatency:
    def test_nadir_1000km(self):
        # Hand oracle: d / c for a 1000 km vertical separation.
        ground = np.array([EARTH_RADIUS_M, 0.0, 0.0])
        sat = np.array([ORBIT_RADIUS, 0.0, 0.0])
        expected = 1000e3 / SPEED_OF_LIGHT_M_S
        assert link_latency(ground, sat) == pytest.approx(expected, rel=1e-12)
        assert link_latency(ground, sat) == pytest.approx(3.3356e-3, rel=1e-4)

    def test_one_meter_offset(self):
        a = np.array([EARTH_RADIUS_M, 0.0, 0.0])
        b = a + np.array([1.0, 0.0, 0.0])
        assert link_latency(a, b) == pytest.approx(3.3356e-9, rel=1e-4)

    def test_intra_plane_neighbor_chord(self):
        # 15 satellites per plane: 24 deg spacing, chord 2 R sin(12 deg).
        pos = propagate_walker(paper_walker())
        chord = 2.0 * ORBIT_RADIUS * math.sin(math.radians(12.0))
        expected = chord / SPEED_OF_LIGHT_M_S
        assert link_latency(pos[0], pos[1]) == pytest.approx(expected, rel=1e-9)
        assert expected == pytest.approx(10.224e-3, rel=1e-4)


def spread_sites(walker, n, seed=0):
    """Sites jittered around random sub-satellite points (always visible)."""
    rng = np.random.default_rng(seed)
    pos = propagate_walker(walker)
    sites = []
    for _ in range(n):
        sat = int(rng.integers(0, pos.shape[0]))
        sites.append(subpoint_of(pos[sat], jitter=(rng.uniform(-3, 3), rng.uniform(-3, 3))))
    return sites


def subpoint_of(position, jitter=(0.0, 0.0)):
    lat = math.degrees(math.asin(position[2] / np.linalg.norm(position)))
    lon = math.degrees(math.atan2(position[1], position[0]))
    lon = ((lon + jitter[1] + 180.0) % 360.0) - 180.0
    return GeoPoint(max(-90.0, min(90.0, lat + jitter[0])), lon)


class TestBuildTopology:
    def test_paper_scale_isl_count(self):
        # 6 rings of 15 intra-plane edges + 15x6 inter-plane pairs on the
        # closed grid, doubled for direction.
        walker = paper_walker()
        pos = propagate_walker(walker)
        topo = build_topology(walker, [subpoint_of(pos[3])], [subpoint_of(pos[40])])
        assert len(topo.isl_links) == 360

    def test_default_capacities_match_simulation_table(self):
        walker = paper_walker()
        pos = propagate_walker(walker)
        topo = build_topology(walker, [subpoint_of(pos[3])], [subpoint_of(pos[40])])
        assert {lk.capacity_bps for lk in topo.isl_links} == {10e9}
        assert {lk.capacity_bps for lk in topo.feeder_links} == {10e9}
        assert {lk.capacity_bps for lk in topo.user_links} == {500e6}

    def test_single_satellite_overhead_gives_one_feeder(self):
        walker = WalkerParams(1, 1, 1000e3, 90.0)
        pos = propagate_walker(walker)
        topo = build_topology(walker, [subpoint_of(pos[0])], [subpoint_of(pos[0])])
        assert len(topo.feeder_links) == 1
        feeder = topo.feeder_links[0]
        assert feeder.latency_s == pytest.approx(1000e3 / SPEED_OF_LIGHT_M_S, rel=1e-9)

    def test_isl_degree_budget(self):
        walker = paper_walker()
        pos = propagate_walker(walker)
        topo = build_topology(walker, [subpoint_of(pos[3])], [subpoint_of(pos[40])])
        for sat in topo.satellite_ids():
            assert len(topo.out_links(sat, (LinkKind.INTER_SATELLITE,))) <= 4
            assert len(topo.in_links(sat, (LinkKind.INTER_SATELLITE,))) <= 4

    def test_isl_symmetry(self):
        walker = paper_walker()
        pos = propagate_walker(walker)
        topo = build_topology(walker, [subpoint_of(pos[3])], [subpoint_of(pos[40])])
        directed = {(lk.src, lk.dst): lk for lk in topo.isl_links}
        for (a, b), lk in directed.items():
            rev = directed[(b, a)]
            assert rev.capacity_bps == lk.capacity_bps
            assert rev.latency_s == lk.latency_s

    def test_link_kinds_partition_and_latencies(self):
        walker = paper_walker(num_planes=4, sats_per_plane=6)
        pos = propagate_walker(walker)
        topo = build_topology(
            walker, [subpoint_of(pos[0]), subpoint_of(pos[13])], spread_sites(walker, 6, seed=10)
        )
        ids = [lk.id for lk in topo.links]
        assert ids == sorted(set(ids))
        by_kind = (
            len(topo.isl_links) + len(topo.feeder_links) + len(topo.user_links)
        )
        assert by_kind == len(topo.links)
        for lk in topo.links:
            d = np.linalg.norm(
                topo.node(lk.src).position - topo.node(lk.dst).position
            )
            assert lk.latency_s == pytest.approx(d / SPEED_OF_LIGHT_M_S, rel=1e-9)
            assert lk.latency_s > 0

    def test_link_endpoint_kinds(self):
        walker = paper_walker(num_planes=4, sats_per_plane=6)
        pos = propagate_walker(walker)
        topo = build_topology(
            walker, [subpoint_of(pos[0])], spread_sites(walker, 6, seed=10)
        )
        sats = set(topo.satellite_ids())
        gss = set(topo.ground_station_ids())
        gnbs = set(topo.gnb_ids())
        for lk in topo.isl_links:
            assert lk.src in sats and lk.dst in sats
        for lk in topo.feeder_links:
            assert lk.src in sats and lk.dst in gss
        for lk in topo.user_links:
            assert lk.src in gnbs and lk.dst in sats

    def test_deterministic_construction(self):
        walker = paper_walker(num_planes=4, sats_per_plane=6)
        pos = propagate_walker(walker)
        args = (walker, [subpoint_of(pos[0])], spread_sites(walker, 5, seed=3))
        assert build_topology(*args).to_json() == build_topology(*args).to_json()

    def test_blind_gnb_reported_with_id(self):
        # One equatorial satellite; a gNB at the pole sees nothing.
        walker = WalkerParams(1, 1, 1000e3, 90.0)
        with pytest.raises(GnbVisibilityError) as err:
            build_topology(
                walker,
                [subpoint_of(propagate_walker(walker)[0])],
                [GeoPoint(0.0, 0.0), GeoPoint(0.0, 90.0)],
            )
        assert 1 in err.value.gnb_ids
        assert "1" in str(err.value)

    def test_open_seam_reduces_isls(self):
        walker = paper_walker(num_planes=4, sats_per_plane=6)
        pos = propagate_walker(walker)
        closed = build_topology(walker, [subpoint_of(pos[0])], [subpoint_of(pos[2])])
        open_ = build_topology(
            walker, [subpoint_of(pos[0])], [subpoint_of(pos[2])], close_seam=False
        )
        # Breaking the seam removes sats_per_plane undirected adjacencies.
        assert len(closed.isl_links) - len(open_.isl_links) == 2 * 6


class TestNearestVisible:
    def test_subsatellite_point_picks_that_satellite(self):
        walker = paper_walker()
        pos = propagate_walker(walker)
        assert nearest_visible_satellite(subpoint_of(pos[7]), pos, 10.0) == 7

    def test_tie_breaks_to_lowest_id(self):
        # Mirrored satellites are bitwise equidistant from a gNB on the axis.
        r = ORBIT_RADIUS
        pos = np.full((13, 3), 1e9)
        ang = math.radians(15.0)
        pos[3] = [r * math.cos(ang), r * math.sin(ang), 0.0]
        pos[12] = [r * math.cos(ang), -r * math.sin(ang), 0.0]
        gnb = GeoPoint(0.0, 0.0)
        assert nearest_visible_satellite(gnb, pos, 5.0) == 3

    def test_matches_exhaustive_scan(self):
        walker = paper_walker(num_planes=4, sats_per_plane=6)
        pos = propagate_walker(walker)
        rng = np.random.default_rng(42)
        for _ in range(25):
            site = GeoPoint(
                math.degrees(math.asin(rng.uniform(-1, 1))), rng.uniform(-180, 180)
            )
            g = site.to_ecef()
            visible = [
                (np.linalg.norm(pos[i] - g), i)
                for i in range(pos.shape[0])
                if elevation_deg(g, pos[i]) >= 10.0
            ]
            if not visible:
                with pytest.raises(GnbVisibilityError):
                    nearest_visible_satellite(site, pos, 10.0)
                continue
            best = min(visible)
            assert nearest_visible_satellite(site, pos, 10.0) == best[1]


class TestGeoPoint:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 180.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 0.0, -5.0)

    def test_ecef_round_trip(self):
        p = GeoPoint(35.71, 139.49)
        v = p.to_ecef()
        assert np.linalg.norm(v) == pytest.approx(EARTH_RADIUS_M, rel=1e-12)
        assert elevation_deg(v, v * (ORBIT_RADIUS / EARTH_RADIUS_M)) == pytest.approx(90.0)
