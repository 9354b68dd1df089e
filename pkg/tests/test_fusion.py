"""Cross-attention fusion: gate softmax behavior and the blend arithmetic."""

import math

import pytest
import torch

from tamperloc.errors import ConfigError
from tamperloc.fusion import ConcatFusion, CrossAttentionFusion, GatePair


def _constant_gates(layer: CrossAttentionFusion, logit_rgb: float, logit_freq: float):
    """Zero the score weights and pin the biases, making gates input-free."""
    with torch.no_grad():
        layer.score_rgb.weight.zero_()
        layer.score_freq.weight.zero_()
        layer.score_rgb.bias.fill_(logit_rgb)
        layer.score_freq.bias.fill_(logit_freq)


class TestGates:
    def test_identical_scorers_give_half(self):
        layer = CrossAttentionFusion(channels=4)
        with torch.no_grad():
            layer.score_freq.weight.copy_(layer.score_rgb.weight)
            layer.score_freq.bias.copy_(layer.score_rgb.bias)
        pair = layer.gates(torch.rand(2, 4, 6, 6), torch.rand(2, 4, 6, 6))
        assert torch.allclose(pair.rgb, torch.full_like(pair.rgb, 0.5), atol=1e-6)
        assert torch.allclose(pair.frequency, torch.full_like(pair.frequency, 0.5), atol=1e-6)

    def test_log3_margin_gives_three_quarters(self):
        layer = CrossAttentionFusion(channels=4)
        _constant_gates(layer, math.log(3.0), 0.0)
        pair = layer.gates(torch.rand(1, 4, 3, 3), torch.rand(1, 4, 3, 3))
        assert torch.allclose(pair.rgb, torch.full_like(pair.rgb, 0.75), atol=1e-6)
        assert torch.allclose(pair.frequency, torch.full_like(pair.frequency, 0.25), atol=1e-6)

    def test_gates_sum_to_one_for_any_input(self):
        layer = CrossAttentionFusion(channels=8)
        for _ in range(10):
            pair = layer.gates(torch.randn(2, 8, 5, 7) * 10, torch.randn(2, 8, 5, 7) * 10)
            total = pair.rgb + pair.frequency
            assert (total - 1.0).abs().max().item() < 1e-6

    def test_raw_logits_recorded(self):
        layer = CrossAttentionFusion(channels=4)
        pair = layer.gates(torch.rand(1, 4, 4, 4), torch.rand(1, 4, 4, 4))
        re_soft = torch.softmax(torch.cat([pair.raw_rgb, pair.raw_frequency], dim=1), dim=1)
        assert torch.allclose(re_soft[:, 0:1], pair.rgb, atol=1e-7)

    def test_shape_and_channel_mismatch_rejected(self):
        layer = CrossAttentionFusion(channels=4)
        with pytest.raises(ConfigError):
            layer.gates(torch.rand(1, 4, 4, 4), torch.rand(1, 4, 8, 8))
        with pytest.raises(ConfigError):
            layer.gates(torch.rand(1, 2, 4, 4), torch.rand(1, 2, 4, 4))

    def test_gate_pair_shape_check(self):
        with pytest.raises(ValueError):
            GatePair(torch.rand(1, 1, 4, 4), torch.rand(1, 1, 2, 2))


class TestFusion:
    def test_saturated_gate_selects_rgb(self):
        layer = CrossAttentionFusion(channels=4)
        _constant_gates(layer, 40.0, 0.0)
        r, f = torch.rand(1, 4, 5, 5), torch.rand(1, 4, 5, 5)
        assert torch.allclose(layer(r, f), r, atol=1e-6)

    def test_even_gate_averages(self):
        layer = CrossAttentionFusion(channels=4)
        _constant_gates(layer, 1.3, 1.3)
        r, f = torch.rand(1, 4, 5, 5), torch.rand(1, 4, 5, 5)
        assert torch.allclose(layer(r, f), (r + f) / 2, atol=1e-6)

    def test_matches_scalar_loop(self):
        torch.manual_seed(5)
        layer = CrossAttentionFusion(channels=2).double()
        r = torch.randn(1, 2, 4, 4, dtype=torch.float64)
        f = torch.randn(1, 2, 4, 4, dtype=torch.float64)
        out = layer(r, f)

        wr = layer.score_rgb.weight.detach()[0, :, 0, 0]
        wf = layer.score_freq.weight.detach()[0, :, 0, 0]
        both = torch.cat([r, f], dim=1)[0]
        for y in range(4):
            for x in range(4):
                gr = ((wr * both[:, y, x]).sum() + layer.score_rgb.bias.detach()[0]).item()
                gf = ((wf * both[:, y, x]).sum() + layer.score_freq.bias.detach()[0]).item()
                er, ef = math.exp(gr), math.exp(gf)
                ar = er / (er + ef)
                for c in range(2):
                    want = r[0, c, y, x] * ar + f[0, c, y, x] * (1 - ar)
                    assert out[0, c, y, x].item() == pytest.approx(want.item(), abs=1e-6)

    def test_blend_stays_between_streams(self):
        layer = CrossAttentionFusion(channels=8)
        r = torch.randn(2, 8, 6, 6) * 3
        f = torch.randn(2, 8, 6, 6) * 3
        m = layer(r, f)
        lo = torch.minimum(r, f) - 1e-6
        hi = torch.maximum(r, f) + 1e-6
        assert bool(((m >= lo) & (m <= hi)).all())

    def test_gradients_match_finite_differences(self, fd_check):
        torch.manual_seed(2)
        layer = CrossAttentionFusion(channels=2).double()
        r = torch.randn(1, 2, 4, 4, dtype=torch.float64)
        f = torch.randn(1, 2, 4, 4, dtype=torch.float64)

        def loss_fn():
            return layer(r, f).pow(2).mean()

        fd_check(loss_fn, layer.parameters(), n_coords=3)


class TestConcatBaseline:
    def test_projects_back_to_stream_width(self):
        layer = ConcatFusion(channels=8)
        out = layer(torch.rand(2, 8, 6, 6), torch.rand(2, 8, 6, 6))
        assert out.shape == (2, 8, 6, 6)

    def test_mismatch_rejected(self):
        layer = ConcatFusion(channels=8)
        with pytest.raises(ConfigError):
            layer(torch.rand(1, 8, 4, 4), torch.rand(1, 8, 8, 8))
