"""Central finite-difference checks for the hand-written backprop."""

import numpy as np


def relative_error(a, b, floor=1e-10):
    return abs(a - b) / max(abs(a) + abs(b), floor)


def check_params(loss_fn, params, analytic, rng, probes=64, step=1e-5):
    """Compare ``analytic`` gradients with central differences of ``loss_fn()``.

    ``params`` are the live arrays ``loss_fn`` reads.  Probes are random
    (array, index) pairs.  Returns the largest relative error seen.
    """
    sizes = np.array([p.size for p in params])
    picks = rng.choice(len(params), size=probes, p=sizes / sizes.sum())
    worst = 0.0
    for k in picks:
        flat = params[k].reshape(-1)
        j = rng.integers(flat.size)
        old = flat[j]
        flat[j] = old + step
        up = loss_fn()
        flat[j] = old - step
        down = loss_fn()
        flat[j] = old
        numeric = (up - down) / (2 * step)
        worst = max(worst, relative_error(analytic[k].reshape(-1)[j], numeric))
    return worst


def mlp_gradient_error(net, rng, batch=8, probes=64, step=1e-5):
    """Worst relative error of ``net.backward`` on a random linear readout."""
    x = rng.normal(size=(batch, net.sizes[0]))
    c = rng.normal(size=(batch, net.sizes[-1]))

    def loss():
        return float(np.sum(c * net.forward(x)))

    _, cache = net.forward_cache(x)
    grads, _ = net.backward(cache, c)
    err = check_params(loss, net.params, grads, rng, probes, step)
    # input gradient through the same cache
    _, gx = net.backward(cache, c)
    for _ in range(8):
        i, j = rng.integers(batch), rng.integers(net.sizes[0])
        old = x[i, j]
        x[i, j] = old + step
        up = loss()
        x[i, j] = old - step
        down = loss()
        x[i, j] = old
        err = max(err, relative_error(gx[i, j], (up - down) / (2 * step)))
    return err
