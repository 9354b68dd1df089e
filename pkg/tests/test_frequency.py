"""Frequency pipeline: color conversion, block DCT, rearrangement, normalization.

Derived values are checked against independent oracles: the scalar BT.601
formulas, scipy's dctn as a reference transform, and recomputed statistics.
"""

import numpy as np
import pytest
import scipy.fft
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from tamperloc.frequency import (
    FrequencyVolume,
    block_dct_rearrange,
    dct_matrix,
    denormalize_channels,
    inverse_block_dct,
    normalize_channels,
    rgb_to_ycbcr,
    rgb_to_ycbcr_resized,
)


class TestColorConversion:
    def test_black_maps_to_zero_luma_neutral_chroma(self):
        out = rgb_to_ycbcr(torch.zeros(3, 16, 16))
        assert torch.allclose(out[0], torch.zeros(16, 16), atol=1e-5)
        assert torch.allclose(out[1], torch.full((16, 16), 128.0), atol=1e-5)
        assert torch.allclose(out[2], torch.full((16, 16), 128.0), atol=1e-5)

    def test_white_is_achromatic(self):
        out = rgb_to_ycbcr(torch.full((3, 8, 8), 255.0))
        assert torch.allclose(out[0], torch.full((8, 8), 255.0), atol=1e-3)
        assert torch.allclose(out[1], torch.full((8, 8), 128.0), atol=1e-3)
        assert torch.allclose(out[2], torch.full((8, 8), 128.0), atol=1e-3)

    def test_pure_red_matches_scalar_formula(self):
        # independent scalar evaluation of the full-range BT.601 matrix
        r, g, b = 255.0, 0.0, 0.0
        want_y = 0.299 * r + 0.587 * g + 0.114 * b
        want_cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
        want_cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
        img = torch.zeros(3, 8, 8)
        img[0] = 255.0
        out = rgb_to_ycbcr(img)
        assert abs(out[0, 0, 0].item() - want_y) < 0.5
        assert abs(out[1, 0, 0].item() - want_cb) < 0.5
        assert abs(out[2, 0, 0].item() - want_cr) < 0.5

    def test_resize_doubles_spatial_dims(self):
        out = rgb_to_ycbcr_resized(torch.rand(3, 16, 24) * 255)
        assert out.shape == (3, 32, 48)
        batched = rgb_to_ycbcr_resized(torch.rand(2, 3, 8, 8) * 255)
        assert batched.shape == (2, 3, 16, 16)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            rgb_to_ycbcr(torch.rand(4, 16, 16))
        with pytest.raises(ValueError):
            rgb_to_ycbcr_resized(torch.rand(3, 4, 16))


class TestBlockDct:
    def test_dct_matrix_is_orthonormal(self):
        m = dct_matrix(8, dtype=torch.float64)
        assert torch.allclose(m @ m.T, torch.eye(8, dtype=torch.float64), atol=1e-12)

    def test_constant_components_hit_dc_channels_only(self):
        consts = (10.0, 20.0, 40.0)
        ycbcr = torch.stack([torch.full((16, 16), c) for c in consts])
        vol = block_dct_rearrange(ycbcr, 8)
        assert vol.channels.shape == (192, 2, 2)
        for comp, c in enumerate(consts):
            dc = vol.channels[comp * 64]
            assert torch.allclose(dc, torch.full((2, 2), 8.0 * c), atol=1e-4)
        rest = torch.ones(192, dtype=torch.bool)
        rest[[0, 64, 128]] = False
        assert vol.channels[rest].abs().max().item() < 1e-4

    def test_all_zero_input_gives_all_zero_volume(self):
        vol = block_dct_rearrange(torch.zeros(3, 16, 16), 8)
        assert vol.channels.abs().max().item() == 0.0

    def test_matches_scipy_dctn_per_block(self):
        rng = np.random.default_rng(3)
        plane = rng.uniform(0.0, 255.0, (16, 16))
        vol = block_dct_rearrange(torch.from_numpy(plane).reshape(1, 16, 16), 8)
        for by in range(2):
            for bx in range(2):
                ref = scipy.fft.dctn(
                    plane[8 * by:8 * by + 8, 8 * bx:8 * bx + 8], norm="ortho"
                )
                for u in range(8):
                    for v in range(8):
                        got = vol.channels[u * 8 + v, by, bx].item()
                        assert got == pytest.approx(ref[u, v], abs=1e-5)

    def test_indivisible_dims_rejected(self):
        with pytest.raises(ValueError):
            block_dct_rearrange(torch.rand(3, 20, 16), 8)

    def test_channel_count_invariant(self):
        vol = block_dct_rearrange(torch.rand(3, 64, 64), 8)
        assert vol.num_channels == 3 * 8 * 8 == 192

    def test_energy_preserved_per_block(self):
        x = torch.rand(3, 16, 16, dtype=torch.float64) * 255
        vol = block_dct_rearrange(x, 8)
        for comp in range(3):
            for by in range(2):
                for bx in range(2):
                    pix = x[comp, 8 * by:8 * by + 8, 8 * bx:8 * bx + 8].pow(2).sum()
                    coef = vol.channels[comp * 64:(comp + 1) * 64, by, bx].pow(2).sum()
                    assert coef.item() == pytest.approx(pix.item(), rel=1e-4)


class TestNormalization:
    def test_symmetric_two_value_channel(self):
        plane = torch.tensor([[1.0, 3.0], [3.0, 1.0]]).repeat(4, 4)
        vol = FrequencyVolume(plane.reshape(1, 8, 8), torch.zeros(1), torch.ones(1), 8, 1)
        out = normalize_channels(vol)
        want = torch.tensor([[-1.0, 1.0], [1.0, -1.0]]).repeat(4, 4)
        assert torch.allclose(out.channels[0], want, atol=1e-4)
        assert out.per_channel_mean[0].item() == pytest.approx(2.0)
        assert out.per_channel_std[0].item() == pytest.approx(1.0)

    def test_constant_channel_goes_to_zero(self):
        vol = FrequencyVolume(torch.full((1, 8, 8), 5.0), torch.zeros(1), torch.ones(1), 8, 1)
        out = normalize_channels(vol)
        assert out.channels.abs().max().item() == 0.0

    def test_random_channels_standardized(self):
        vol = block_dct_rearrange(torch.rand(3, 64, 64) * 255, 8)
        out = normalize_channels(vol)
        means = out.channels.mean(dim=(-2, -1))
        stds = out.channels.std(dim=(-2, -1), unbiased=False)
        assert means.abs().max().item() < 1e-4
        assert (stds - 1.0).abs().max().item() < 1e-3

    def test_denormalize_restores_input(self):
        vol = block_dct_rearrange(torch.rand(3, 32, 32, dtype=torch.float64) * 255, 8)
        back = denormalize_channels(normalize_channels(vol))
        assert torch.allclose(back.channels, vol.channels, atol=1e-8)

    def test_volume_channel_mismatch_rejected(self):
        with pytest.raises(ValueError):
            FrequencyVolume(torch.rand(10, 4, 4), torch.zeros(10), torch.ones(10), 8, 192)


class TestRoundTrip:
    def test_bijection_small(self):
        x = torch.rand(3, 32, 32, dtype=torch.float64) * 255
        back = inverse_block_dct(block_dct_rearrange(x, 8))
        assert (back - x).abs().max().item() < 1e-4

    def test_bijection_batched_float32(self):
        x = torch.rand(2, 3, 16, 16) * 255
        back = inverse_block_dct(block_dct_rearrange(x, 8))
        assert (back - x).abs().max().item() < 1e-3

    @settings(max_examples=20, deadline=None)
    @given(
        nh=st.integers(min_value=1, max_value=4),
        nw=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    def test_bijection_property(self, nh, nw, seed):
        g = torch.Generator().manual_seed(seed)
        x = torch.rand(3, 8 * nh, 8 * nw, generator=g, dtype=torch.float64) * 255
        vol = block_dct_rearrange(x, 8)
        assert vol.channels.shape == (192, nh, nw)
        back = inverse_block_dct(vol)
        assert (back - x).abs().max().item() < 1e-8

    def test_total_energy_preserved(self):
        x = torch.rand(3, 64, 64, dtype=torch.float64) * 255
        vol = block_dct_rearrange(x, 8)
        assert vol.channels.pow(2).sum().item() == pytest.approx(
            x.pow(2).sum().item(), rel=1e-4
        )
