import math

import pytest

import mdemap


def test_geometry():
    aoi = mdemap.AreaOfInterest.tokyo()
    x, y = mdemap.project(mdemap.GeoPoint(35.85, 139.3), aoi)
    assert x == 0.0
    assert y == pytest.approx(0.35 * 6371000 * math.pi / 180, rel=1e-12)
    assert mdemap.mesh_of(250.0, 150.0, 100.0) == (2, 1)
    assert mdemap.parent_of(100.0, 23, 7, 1000.0) == (2, 0)
    c = mdemap.mesh_center(100.0, 0, 0, aoi)
    assert mdemap.project(c, aoi) == pytest.approx((50.0, 50.0))
    d = mdemap.geo_distance(mdemap.GeoPoint(35.5, 139.3), mdemap.GeoPoint(35.5, 140.0))
    assert abs(d - 63367.73) < 1.0


def test_direction_and_entropy():
    assert mdemap.direction_of(0.0, 1.0) == 0.0
    assert mdemap.direction_of(1.0, 0.0) == pytest.approx(1.5 * math.pi)
    assert mdemap.bin_of(math.pi) == 50
    assert mdemap.entropy([1] * 100) == pytest.approx(math.log(100), abs=1e-12)
    counts = [0] * 100
    counts[0], counts[1] = 75, 25
    assert mdemap.entropy(counts) == pytest.approx(0.5623351, abs=1e-6)
    with pytest.raises(mdemap.MdeError):
        mdemap.entropy([0] * 100)
    with pytest.raises(mdemap.MdeError):
        mdemap.project(mdemap.GeoPoint(36.5, 139.5))


def test_pipeline_on_synthetic_data(tmp_path):
    points, stations = mdemap.generate(n_users=4000)
    assert len(points) == 4000 * 20
    assert len(stations) == 8
    vectors = mdemap.extract_movements(points)
    assert len(vectors) > 0
    fields = [mdemap.compute_field(vectors, s) for s in mdemap.DEFAULT_SCALES]
    fine = fields[0]
    assert fine.defined_count >= 8
    for count, h in fine.entries.values():
        if h is not None:
            assert count >= 30
            assert 0.0 <= h <= math.log(100)

    top = mdemap.top_k(fine, 8)
    assert all(h > 4.0 for _, _, h, _ in top)
    radii, counts = mdemap.recall_curve(fine, 8, stations, [0.5])
    assert counts == [8]
    prec = mdemap.precision_curve(fine, stations, [8], [100.0])
    assert prec[8] == [100.0]

    scores = mdemap.combine(fields)
    assert all(0.0 <= v <= 1.0 for v in scores.values())
    peaks = mdemap.find_local_peaks(scores)
    assert len(peaks) > 0

    path = str(tmp_path / "field.csv")
    mdemap.write_field_csv(path, fine)
    back = mdemap.read_field_csv(path)
    assert back.entries == fine.entries


def test_cli_entry_point(tmp_path):
    out = str(tmp_path / "syn")
    assert mdemap.run(["synth", "--users", "100", "-o", out]) == 0
    assert mdemap.run(["compute", "-i", out + "/missing.csv", "-o", out]) == 2
    points, skipped = mdemap.read_points(out + "/points.csv")
    assert skipped == 0
    assert len(points) == 2000
