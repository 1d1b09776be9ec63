import math

import numpy as np
import pytest

from dppkit import Ball, Box, PointPattern, unit_ball, unit_box


def test_box_basic_geometry():
    box = Box([[0.0, 2.0], [1.0, 4.0]])
    assert box.dim == 2
    assert box.volume == pytest.approx(6.0)
    inside = box.contains([[1.0, 2.0], [3.0, 2.0]])
    assert inside.tolist() == [True, False]


def test_box_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Box([[1.0, 1.0]])
    with pytest.raises(ValueError):
        Box([[2.0, 1.0], [0.0, 1.0]])


def test_unit_box_and_ball_volumes():
    assert unit_box(3).volume == pytest.approx(1.0)
    assert unit_ball(1, 1.0).volume == pytest.approx(2.0)
    assert unit_ball(2, 2.0).volume == pytest.approx(4 * math.pi)
    assert unit_ball(3, 1.0).volume == pytest.approx(4 * math.pi / 3)


def test_box_set_covariance_hand_value():
    # unit square shifted by (0.3, 0.1): overlap 0.7 * 0.9
    box = unit_box(2)
    val = box.set_covariance([[0.3, 0.1]])
    assert val[0] == pytest.approx(0.63, abs=1e-15)
    assert box.set_covariance([[1.5, 0.0]])[0] == 0.0
    assert box.set_covariance([[0.0, 0.0]])[0] == pytest.approx(1.0)


def test_ball_iso_set_covariance_hand_values():
    # two unit discs at distance 1: 2 acos(1/2) - (1/2) sqrt(3)
    disc = unit_ball(2, 1.0)
    want = 2 * math.acos(0.5) - 0.5 * math.sqrt(3.0)
    assert disc.iso_set_covariance([1.0])[0] == pytest.approx(want, rel=1e-12)
    assert disc.iso_set_covariance([0.0])[0] == pytest.approx(disc.volume, rel=1e-12)
    assert disc.iso_set_covariance([2.0])[0] == 0.0
    # two unit 3-balls at distance 1: lens volume 5 pi / 12
    ball3 = unit_ball(3, 1.0)
    assert ball3.iso_set_covariance([1.0])[0] == pytest.approx(5 * math.pi / 12, rel=1e-12)
    # d=1: interval overlap 2R - r
    seg = unit_ball(1, 1.0)
    assert seg.iso_set_covariance([0.5])[0] == pytest.approx(1.5)


def test_box_iso_set_covariance_matches_monte_carlo():
    box = unit_box(2)
    r = 0.4
    rng = np.random.default_rng(11)
    # P(x and x+r*u both in box) over random x, angles = iso set covariance
    x = rng.random((200000, 2))
    ang = rng.random(200000) * 2 * math.pi
    shift = r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    hit = np.mean(box.contains(x + shift))
    got = box.iso_set_covariance([r])[0]
    assert abs(got - hit) < 4 * math.sqrt(hit * (1 - hit) / 200000)


def test_ball_sampling_and_distances():
    rng = np.random.default_rng(3)
    ball = Ball([1.0, -1.0], 0.5)
    pts = ball.sample_uniform(rng, 4000)
    assert np.all(ball.contains(pts))
    # fraction inside half the radius ~ (1/2)^d
    frac = np.mean(np.linalg.norm(pts - ball.center, axis=1) <= 0.25)
    assert abs(frac - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 4000)
    d = ball.boundary_distance([[1.0, -1.0]])
    assert d[0] == pytest.approx(0.5)


def test_box_sampling_and_boundary_distance():
    rng = np.random.default_rng(4)
    box = Box([[0.0, 1.0], [0.0, 2.0]])
    pts = box.sample_uniform(rng, 2000)
    assert np.all(box.contains(pts))
    assert box.boundary_distance([[0.1, 1.0]])[0] == pytest.approx(0.1)


def test_ball_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        Ball([0.0, 0.0], 0.0)


def test_point_pattern_container():
    pat = PointPattern(np.array([[0.2, 0.3], [0.6, 0.9]]), unit_box(2))
    assert len(pat) == 2
    assert pat.dim == 2
    empty = PointPattern(np.empty(0), unit_box(3))
    assert len(empty) == 0
    assert empty.points.shape == (0, 3)


def test_point_pattern_outside_domain_raises():
    with pytest.raises(ValueError):
        PointPattern(np.array([[1.5, 0.5]]), unit_box(2))
