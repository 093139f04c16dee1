"""Finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, no_grad


def gradcheck(
    loss_fn,
    params: list[Tensor],
    rng: np.random.Generator,
    coords_per_param: int = 5,
    step: float = 1e-4,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn`` must rebuild the graph on every call. A random subset of
    coordinates per parameter is probed; relative error uses
    ``|a - n| / max(|a|, |n|, 1e-6)``. Run in double precision.
    """
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]

    worst = 0.0
    for p, ana in zip(params, analytic):
        flat = p.data.reshape(-1)
        n_coords = min(coords_per_param, flat.size)
        coords = rng.choice(flat.size, size=n_coords, replace=False)
        for c in coords:
            original = flat[c]
            flat[c] = original + step
            with no_grad():
                hi = loss_fn().item()
            flat[c] = original - step
            with no_grad():
                lo = loss_fn().item()
            flat[c] = original
            numeric = (hi - lo) / (2.0 * step)
            a = float(ana.reshape(-1)[c])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst
