"""Shared fixtures: a tiny on-disk corpus and a finite-difference gradient oracle."""

import numpy as np
import pytest
import torch

from tamperloc.datagen import GenOptions, build_corpus


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """10-sample 64px corpus (8 train / 2 test) shared across CLI-level tests."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    build_corpus(root, count=10, opts=GenOptions(size=64), seed=11, train_fraction=0.8)
    return root


def finite_diff_check(loss_fn, params, n_coords=3, eps=1e-5, tol=1e-3, seed=0):
    """Compare autograd against central differences on sampled coordinates.

    ``loss_fn`` must be a deterministic closure returning a scalar tensor
    (modules in eval mode, float64 recommended). Relative error uses
    |a - n| / max(|a| + |n|, 1e-6) so near-zero gradients are compared
    on an absolute floor.
    """
    rng = np.random.default_rng(seed)
    params = [p for p in params if p.requires_grad]
    assert params, "nothing to check"
    for p in params:
        p.grad = None
    loss_fn().backward()
    for p in params:
        assert p.grad is not None, "parameter not reached by autodiff"
        flat = p.data.reshape(-1)
        gflat = p.grad.reshape(-1)
        count = min(n_coords, flat.numel())
        for i in rng.choice(flat.numel(), size=count, replace=False):
            orig = flat[i].item()
            flat[i] = orig + eps
            with torch.no_grad():
                hi = loss_fn().item()
            flat[i] = orig - eps
            with torch.no_grad():
                lo = loss_fn().item()
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * eps)
            analytic = gflat[i].item()
            err = abs(numeric - analytic) / max(abs(numeric) + abs(analytic), 1e-6)
            assert err < tol, (
                f"grad mismatch at coord {i}: numeric {numeric:.6g} "
                f"analytic {analytic:.6g} rel err {err:.2e}"
            )


@pytest.fixture
def fd_check():
    return finite_diff_check
