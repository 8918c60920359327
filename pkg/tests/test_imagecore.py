import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flarespot.errors import EmptyWindow
from flarespot.imagecore import Window, lab_to_rgb, normalize_window, rgb_to_lab


def reference_lab(r, g, b):
    """Scalar transcription of the sRGB (D65) -> XYZ -> CIELab formulas."""
    def lin(c):
        c = c / 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    R, G, B = lin(r), lin(g), lin(b)
    X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B
    Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B
    Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B

    def f(t):
        d = 6 / 29
        return t ** (1 / 3) if t > d ** 3 else t / (3 * d * d) + 4 / 29

    fx, fy, fz = f(X / 0.95047), f(Y / 1.0), f(Z / 1.08883)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


def px(r, g, b):
    return np.array([[[r, g, b]]], dtype=np.uint8)


def test_white_maps_to_l100():
    lab = rgb_to_lab(px(255, 255, 255))
    assert lab.L[0, 0] == pytest.approx(100.0, abs=1e-3)
    assert abs(lab.a[0, 0]) < 0.01 and abs(lab.b[0, 0]) < 0.01


def test_black_maps_to_zero():
    lab = rgb_to_lab(px(0, 0, 0))
    assert (lab.L[0, 0], lab.a[0, 0], lab.b[0, 0]) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("rgb", [(255, 0, 0), (0, 255, 0), (0, 0, 255), (12, 200, 77), (128, 128, 128)])
def test_matches_reference_formula(rgb):
    lab = rgb_to_lab(px(*rgb))
    ref = reference_lab(*rgb)
    got = (lab.L[0, 0], lab.a[0, 0], lab.b[0, 0])
    for g, e in zip(got, ref):
        assert abs(g - e) < 0.05


def test_red_known_value():
    # published value for sRGB red under D65
    lab = rgb_to_lab(px(255, 0, 0))
    assert lab.L[0, 0] == pytest.approx(53.24, abs=0.05)
    assert lab.a[0, 0] == pytest.approx(80.09, abs=0.05)
    assert lab.b[0, 0] == pytest.approx(67.20, abs=0.05)


def test_round_trip_all_channels_within_one_unit():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    back = lab_to_rgb(rgb_to_lab(img))
    assert np.abs(back.astype(int) - img.astype(int)).max() <= 1


def test_l_range():
    rng = np.random.default_rng(1)
    lab = rgb_to_lab(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
    assert lab.L.min() >= 0 and lab.L.max() <= 100 + 1e-3


def row_window(values):
    plane = np.array([values], dtype=float)
    return plane, Window(center=(len(values) // 2, 0), radius=len(values))


@pytest.mark.parametrize("values, expected", [
    ([10, 20, 30], [0, 0.5, 1]),
    ([7, 7, 7], [0, 0, 0]),
    ([0, 25, 100], [0, 0.25, 1]),
])
def test_normalize_window_examples(values, expected):
    plane, w = row_window(values)
    np.testing.assert_allclose(normalize_window(plane, w)[0], expected)


def test_normalize_window_restricted_to_window():
    plane = np.array([[0.0, 50.0, 60.0, 70.0, 1000.0]])
    w = Window(center=(2, 0), radius=1)
    out = normalize_window(plane, w)
    np.testing.assert_allclose(out[0, 1:4], [0, 0.5, 1])
    # outside pixels saturate
    assert out[0, 0] == 0 and out[0, 4] == 1


def test_empty_window_raises():
    with pytest.raises(EmptyWindow):
        normalize_window(np.zeros((5, 5)), Window(center=(100, 100), radius=3))


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0.01, 100), shift=st.floats(-1000, 1000), seed=st.integers(0, 2 ** 16))
def test_normalize_window_affine_invariant(alpha, shift, seed):
    plane = np.random.default_rng(seed).uniform(0, 100, size=(12, 12))
    w = Window(center=(5, 5), radius=4)
    a = normalize_window(plane, w)
    b = normalize_window(alpha * plane + shift, w)
    np.testing.assert_allclose(a, b, atol=1e-9)
    inside = w.mask(plane.shape)
    assert math.isclose(a[inside].min(), 0.0, abs_tol=1e-12)
    assert math.isclose(a[inside].max(), 1.0, abs_tol=1e-12)
