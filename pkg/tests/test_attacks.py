"""Robustness attacks: identity cases, degradation direction, parameter checks."""

import math

import cv2
import numpy as np
import pytest

from tamperloc.attacks import (
    ATTACK_SUITE,
    apply_attack,
    attack_tag,
    jpeg_attack,
    scale_attack,
)
from tamperloc.datagen import synth_source_image
from tamperloc.errors import AttackError


def _psnr(a, b):
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    return math.inf if mse == 0 else 10 * math.log10(255.0 ** 2 / mse)


def _smooth_gradient(size=96):
    y, x = np.mgrid[0:size, 0:size].astype(np.float32)
    img = np.stack([x, y, (x + y) / 2], axis=-1) * (255.0 / (2 * size))
    return img.astype(np.uint8)


def _checkerboard(size=96, cell=4):
    y, x = np.mgrid[0:size, 0:size]
    board = (((y // cell) + (x // cell)) % 2) * 255
    return np.stack([board] * 3, axis=-1).astype(np.uint8)


def _laplacian_energy(img):
    gray = cv2.cvtColor(img, cv2.COLOR_RGB2GRAY)
    return float(np.abs(cv2.Laplacian(gray, cv2.CV_64F)).mean())


class TestSuite:
    def test_suite_contents_and_tags(self):
        assert ATTACK_SUITE[0] is None
        tags = [attack_tag(a) for a in ATTACK_SUITE]
        assert tags == ["none", "jpeg70", "jpeg50", "scale0.7", "scale0.5"]

    def test_apply_none_is_identity(self):
        img = synth_source_image(0, 64)
        assert np.array_equal(apply_attack(img, None), img)

    def test_unknown_attack_rejected(self):
        with pytest.raises(AttackError):
            apply_attack(synth_source_image(0, 64), ("blur", 3))


class TestJpeg:
    def test_preserves_shape_and_dtype(self):
        img = synth_source_image(1, 80)
        out = jpeg_attack(img, 50)
        assert out.shape == img.shape and out.dtype == np.uint8

    def test_high_quality_is_nearly_lossless_on_smooth_input(self):
        img = _smooth_gradient()
        out = jpeg_attack(img, 100)
        assert _psnr(img, out) > 40.0

    def test_low_quality_changes_pixels(self):
        img = synth_source_image(2, 96)
        out = jpeg_attack(img, 50)
        assert not np.array_equal(out, img)

    def test_quality_orders_distortion(self):
        img = synth_source_image(3, 96)
        assert _psnr(img, jpeg_attack(img, 90)) > _psnr(img, jpeg_attack(img, 30))

    @pytest.mark.parametrize("quality", [0, 101, -5])
    def test_invalid_quality(self, quality):
        with pytest.raises(AttackError):
            jpeg_attack(synth_source_image(0, 64), quality)


class TestScale:
    def test_ratio_one_is_near_identity(self):
        img = synth_source_image(4, 64)
        out = scale_attack(img, 1.0)
        assert out.shape == img.shape
        assert np.max(np.abs(out.astype(int) - img.astype(int))) <= 1

    def test_round_trip_restores_size(self):
        img = synth_source_image(5, 90)
        out = scale_attack(img, 0.5)
        assert out.shape == img.shape and out.dtype == np.uint8

    def test_downscale_smooths_high_frequency(self):
        img = _checkerboard()
        out = scale_attack(img, 0.5)
        assert _laplacian_energy(out) < _laplacian_energy(img)

    def test_stronger_scaling_degrades_more(self):
        img = synth_source_image(6, 96)
        assert _psnr(img, scale_attack(img, 0.7)) > _psnr(img, scale_attack(img, 0.5))

    @pytest.mark.parametrize("ratio", [0.0, -0.3, 1.5])
    def test_invalid_ratio(self, ratio):
        with pytest.raises(AttackError):
            scale_attack(synth_source_image(0, 64), ratio)


class TestMaskInvariance:
    def test_attacks_change_only_the_image(self):
        # evaluate_dataset applies attacks to images alone; the functions here
        # must not mutate their input in place.
        img = synth_source_image(7, 64)
        before = img.copy()
        for attack in ATTACK_SUITE:
            apply_attack(img, attack)
        assert np.array_equal(img, before)
