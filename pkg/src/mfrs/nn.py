"""Small ReLU multilayer perceptrons with hand-written backprop and Adam.

Everything is float64.  Inputs are 2-D ``(batch, features)`` arrays.
"""

import numpy as np


class TrainingDivergence(RuntimeError):
    """Raised when a loss or gradient stops being finite."""


class Mlp:
    """Fully connected net ``sizes[0] -> ... -> sizes[-1]`` with ReLU hidden units.

    ``out_activation`` is ``"linear"`` or ``"tanh"``; a tanh output is
    multiplied by ``out_scale``.  Weights start uniform in +-1/sqrt(fan_in);
    ``zero_output=True`` zeroes the last layer so the net is identically 0.
    """

    def __init__(self, sizes, rng=None, out_activation="linear", out_scale=1.0,
                 zero_output=False):
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError("need at least input and output sizes, all positive")
        if out_activation not in ("linear", "tanh"):
            raise ValueError("unknown output activation %r" % (out_activation,))
        self.sizes = tuple(int(s) for s in sizes)
        self.out_activation = out_activation
        self.out_scale = float(out_scale)
        rng = rng if rng is not None else np.random.default_rng(0)
        self._allocate()
        for W, b in zip(self.weights, self.biases):
            bound = 1.0 / np.sqrt(W.shape[0])
            W[:] = rng.uniform(-bound, bound, W.shape)
            b[:] = rng.uniform(-bound, bound, b.shape)
        if zero_output:
            self.weights[-1][:] = 0.0
            self.biases[-1][:] = 0.0

    def _shapes(self):
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            yield (fan_in, fan_out)
            yield (fan_out,)

    def _views(self, flat):
        return [flat[a:b].reshape(shape) for a, b, shape in self._layout]

    def _allocate(self, flat=None):
        # all parameters live in one contiguous vector; weights/biases are views
        self._layout, n = [], 0
        for shape in self._shapes():
            k = int(np.prod(shape))
            self._layout.append((n, n + k, shape))
            n += k
        self.flat = np.zeros(n) if flat is None else np.array(flat, dtype=float).reshape(n)
        views = self._views(self.flat)
        self.weights, self.biases = views[0::2], views[1::2]

    @property
    def params(self):
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def copy(self):
        new = object.__new__(Mlp)
        new.sizes, new.out_activation, new.out_scale = self.sizes, self.out_activation, self.out_scale
        new._allocate(self.flat)
        return new

    def same_architecture(self, other):
        return (self.sizes == other.sizes and self.out_activation == other.out_activation
                and self.out_scale == other.out_scale)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ValueError("expected input of shape (n, %d), got %s" % (self.sizes[0], x.shape))
        return x

    def forward(self, x):
        x = self._check(x)
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ W + b
            if i < last:
                np.maximum(x, 0.0, out=x)
        if self.out_activation == "tanh":
            x = self.out_scale * np.tanh(x)
        return x

    __call__ = forward

    def forward_cache(self, x):
        """Forward pass that also returns the activations needed by :meth:`backward`."""
        x = self._check(x)
        acts = [x]
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ W + b
            if i < last:
                x = np.maximum(x, 0.0)
            acts.append(x)
        y = self.out_scale * np.tanh(x) if self.out_activation == "tanh" else x
        return y, (acts, y)

    def backward(self, cache, grad_out):
        """Gradients of ``sum(grad_out * y)`` w.r.t. parameters and input.

        Returns ``(grads, grad_input)`` with ``grads`` ordered like :attr:`params`;
        the list is backed by one flat vector (``grads.flat``).
        """
        acts, y = cache
        g = np.asarray(grad_out, dtype=float)
        if g.shape != y.shape:
            raise ValueError("upstream gradient shape %s != output shape %s" % (g.shape, y.shape))
        if self.out_activation == "tanh":
            t = y / self.out_scale
            g = g * self.out_scale * (1.0 - t * t)
        grads = Grads(np.empty_like(self.flat), self)
        for i in range(len(self.weights) - 1, -1, -1):
            np.dot(acts[i].T, g, out=grads[2 * i])
            np.sum(g, axis=0, out=grads[2 * i + 1])
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (acts[i] > 0.0)
        return grads, g

    def state(self):
        return {"sizes": np.array(self.sizes), "out_activation": np.array(self.out_activation),
                "out_scale": np.array(self.out_scale),
                **{"p%d" % i: p for i, p in enumerate(self.params)}}

    @classmethod
    def from_state(cls, state):
        net = cls(state["sizes"].tolist(), out_activation=str(state["out_activation"]),
                  out_scale=float(state["out_scale"]))
        params = [np.asarray(state["p%d" % i], dtype=float).ravel()
                  for i in range(2 * (len(net.sizes) - 1))]
        net._allocate(np.concatenate(params))
        return net


class Grads(list):
    """Per-array gradients that are views into a single flat vector."""

    def __init__(self, flat, net):
        super().__init__(net._views(flat))
        self.flat = flat


def _flatten(grads):
    flat = getattr(grads, "flat", None)
    if flat is not None:
        return flat
    return np.concatenate([np.asarray(g, dtype=float).ravel() for g in grads])


def save_nets(path, **nets):
    """Write named nets to one ``.npz`` file (keys ``<name>/<field>``)."""
    arrays = {}
    for name, net in nets.items():
        for key, value in net.state().items():
            arrays["%s/%s" % (name, key)] = value
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_nets(path):
    with np.load(path, allow_pickle=False) as data:
        grouped = {}
        for key in data.files:
            name, field = key.split("/", 1)
            grouped.setdefault(name, {})[field] = data[key]
    return {name: Mlp.from_state(state) for name, state in grouped.items()}


class Adam:
    def __init__(self, net, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros_like(net.flat)
        self.v = np.zeros_like(net.flat)
        self.t = 0

    def step(self, net, grads, lr=None):
        """Apply one descent step in place.  Ascend by passing negated grads."""
        g = _flatten(grads)
        if g.shape != net.flat.shape:
            raise ValueError("gradient size does not match the net")
        if not np.isfinite(g).all():
            raise TrainingDivergence("non-finite gradient")
        lr = self.lr if lr is None else lr
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        m, v = self.m, self.v
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        step = np.sqrt(v / (1.0 - b2 ** self.t))
        step += self.eps
        np.divide(m, step, out=step)
        step *= lr / (1.0 - b1 ** self.t)
        net.flat -= step
        return net


def adam_step(net, grads, state, lr=None):
    return state.step(net, grads, lr)


def soft_update(target, online, tau):
    """``target <- (1 - tau) * target + tau * online`` in place."""
    if not target.same_architecture(online):
        raise ValueError("architecture mismatch")
    target.flat *= 1.0 - tau
    target.flat += tau * online.flat
    return target
