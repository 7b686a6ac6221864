"""Per-run and across-seed metrics."""

import numpy as np

SMOOTHING_WINDOW = 100
CI_LEVEL = 0.90
CI_RESAMPLES = 1000
CI_SEED = 0


def average_timesteps(timesteps):
    """Mean terminal timestep over all learning episodes."""
    t = np.asarray(timesteps, dtype=float)
    if t.size == 0:
        raise ValueError("no episodes")
    return float(t.mean())


def moving_average(x, window=SMOOTHING_WINDOW):
    """Trailing mean over the last ``window`` entries (shorter at the start)."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    n = np.arange(1, x.size + 1)
    lo = np.maximum(n - window, 0)
    return (c[n] - c[lo]) / (n - lo)


def final_window(x, fraction=0.1):
    """Mean of the last ``fraction`` of ``x`` (at least one entry)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("no episodes")
    k = max(1, int(round(fraction * x.size)))
    return float(x[-k:].mean())


def bootstrap_ci(samples, level=CI_LEVEL, resamples=CI_RESAMPLES, seed=CI_SEED):
    """Mean and percentile bootstrap interval across seeds.

    ``samples`` has shape ``(n_seeds, n_points)``; seeds are resampled with
    replacement using a fixed generator so the result is reproducible.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n == 0:
        raise ValueError("no seeds")
    mean = x.mean(axis=0)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(resamples, n))
    boot = x[idx].mean(axis=1)
    tail = 100 * (1 - level) / 2
    lo, hi = np.percentile(boot, [tail, 100 - tail], axis=0)
    return mean, lo, hi
