"""Fully connected network with analytic backprop and Adam, in numpy.

Hidden layers use tanh; the output layer is tanh or linear. All math is
float64. Gradients are exact (verified against finite differences in the
test suite), and parameters serialize to a flat binary layout used for
checkpoints and memory accounting.
"""

import struct

import numpy as np

_ACTIVATIONS = ("linear", "tanh")


class Mlp:
    """weights[l] has shape (layer_sizes[l+1], layer_sizes[l])."""

    def __init__(self, layer_sizes, output_activation="linear", rng=None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if output_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.layer_sizes = list(int(s) for s in layer_sizes)
        self.output_activation = output_activation
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            if rng is None:
                w = np.zeros((fan_out, fan_in))
            else:
                bound = 1.0 / np.sqrt(fan_in)
                w = rng.uniform(-bound, bound, (fan_out, fan_in))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def output_dim(self):
        return self.layer_sizes[-1]

    def forward(self, x):
        """Run the network; returns (output, cache) for later backprop.

        Accepts a single vector (d,) or a batch (B, d); the output matches
        the input's batch shape.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.input_dim:
            raise ValueError(f"input dim {x.shape[1]} != {self.input_dim}")
        activations = [x]
        h = x
        last = len(self.weights) - 1
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if layer < last or self.output_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
            activations.append(h)
        cache = (activations, single)
        out = activations[-1][0] if single else activations[-1]
        return out, cache

    def backward(self, cache, output_gradient):
        """Backprop an output gradient; returns (grad_w, grad_b, grad_input).

        For batched caches the parameter gradients are summed over the
        batch (scale the output gradient to get means).
        """
        activations, single = cache
        grad = np.asarray(output_gradient, dtype=float)
        if single:
            grad = grad[None, :]
        if grad.shape != activations[-1].shape:
            raise ValueError("output gradient shape mismatch")
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.weights)
        last = len(self.weights) - 1
        for layer in range(last, -1, -1):
            post = activations[layer + 1]
            if layer < last or self.output_activation == "tanh":
                grad = grad * (1.0 - post**2)  # tanh'(z) from the post-activation
            grad_w[layer] = grad.T @ activations[layer]
            grad_b[layer] = grad.sum(axis=0)
            grad = grad @ self.weights[layer]
        grad_input = grad[0] if single else grad
        return grad_w, grad_b, grad_input

    def count_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self):
        clone = Mlp(self.layer_sizes, self.output_activation)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    # Serialization: int64 activation flag, int64 layer count, int64 layer
    # sizes, then per layer the row-major float64 weights followed by the
    # biases. Header size is 8 * (2 + len(layer_sizes)) bytes.
    def to_bytes(self):
        parts = [struct.pack("<qq", _ACTIVATIONS.index(self.output_activation),
                             len(self.layer_sizes))]
        parts.append(np.asarray(self.layer_sizes, dtype="<i8").tobytes())
        for w, b in zip(self.weights, self.biases):
            parts.append(w.astype("<f8").tobytes())
            parts.append(b.astype("<f8").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data):
        act_idx, n_sizes = struct.unpack_from("<qq", data, 0)
        offset = 16
        sizes = np.frombuffer(data, dtype="<i8", count=n_sizes, offset=offset).tolist()
        offset += 8 * n_sizes
        net = cls(sizes, _ACTIVATIONS[act_idx])
        for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            w = np.frombuffer(data, dtype="<f8", count=fan_in * fan_out, offset=offset)
            offset += 8 * fan_in * fan_out
            b = np.frombuffer(data, dtype="<f8", count=fan_out, offset=offset)
            offset += 8 * fan_out
            net.weights[layer] = w.reshape(fan_out, fan_in).copy()
            net.biases[layer] = b.copy()
        return net

    def header_bytes(self):
        return 8 * (2 + len(self.layer_sizes))


class AdamState:
    """Adam moments for one Mlp, with inverse-time learning-rate decay.

    The effective rate of step t (0-based) is base_lr / (1 + decay * t).
    """

    def __init__(self, net, base_lr=1e-3, decay=1e-5, beta1=0.9, beta2=0.999,
                 epsilon=1e-8):
        self.base_lr = base_lr
        self.decay = decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.m_w = [np.zeros_like(w) for w in net.weights]
        self.v_w = [np.zeros_like(w) for w in net.weights]
        self.m_b = [np.zeros_like(b) for b in net.biases]
        self.v_b = [np.zeros_like(b) for b in net.biases]

    @property
    def current_lr(self):
        return self.base_lr / (1.0 + self.decay * self.step_count)

    def step(self, net, grad_w, grad_b):
        """Apply one Adam update in place."""
        lr = self.current_lr
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for params, grads, ms, vs in ((net.weights, grad_w, self.m_w, self.v_w),
                                      (net.biases, grad_b, self.m_b, self.v_b)):
            for i, g in enumerate(grads):
                if g.shape != params[i].shape:
                    raise ValueError("gradient shape mismatch")
                ms[i] = self.beta1 * ms[i] + (1.0 - self.beta1) * g
                vs[i] = self.beta2 * vs[i] + (1.0 - self.beta2) * g**2
                m_hat = ms[i] / bc1
                v_hat = vs[i] / bc2
                params[i] -= lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


def hidden_width(num_bs_antennas, num_users, num_irs_elements):
    """Default hidden-layer width: max(64, next power of two >= 4*(M*K + N))."""
    target = 4 * (num_bs_antennas * num_users + num_irs_elements)
    w = 1
    while w < target:
        w *= 2
    return max(64, w)
