"""Sparse Adam with lazily decayed moments.

Only parameters named in the current step's gradient are touched.  A
touched parameter first has its moments decayed as if it had received zero
gradients for every skipped step, which makes the update equivalent to a
dense Adam fed zero-padded gradients (with parameter movement applied only
on touched steps).  Bias correction always uses the global step count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> "AdamHyper":
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError("beta1 must lie in [0, 1)")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError("beta2 must lie in [0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        return self


def default_hyperparameters() -> AdamHyper:
    return AdamHyper().validate()


class SparseAdam:
    """Adam state over a fixed-size parameter vector.

    ``clamp=(lo, hi)`` constrains parameters after each update (used for
    presence pre-activations).  ``step`` requires exclusive access to the
    parameter vector; the state is single-owner.
    """

    def __init__(self, n_params: int, hyper: AdamHyper | None = None,
                 clamp: tuple[float, float] | None = None):
        self.hyper = (hyper or AdamHyper()).validate()
        self.m = np.zeros(n_params, dtype=np.float64)
        self.v = np.zeros(n_params, dtype=np.float64)
        self.last_step = np.zeros(n_params, dtype=np.int64)
        self.global_step = 0
        self.clamp = clamp

    def effective_moments(self):
        """Moments as a dense Adam run on zero-padded gradients would hold them.

        The stored vectors are only current as of each parameter's last
        touch; this applies the pending zero-gradient decay.
        """
        h = self.hyper
        pending = (self.global_step - self.last_step).astype(np.float64)
        return self.m * h.beta1 ** pending, self.v * h.beta2 ** pending

    def step(self, params: np.ndarray, ids: np.ndarray, grads: np.ndarray) -> None:
        """Apply one update to the parameters named by ``ids``.

        Rejects the whole step (no state change) if any gradient entry is
        not finite.
        """
        ids = np.asarray(ids, dtype=np.int64)
        grads = np.asarray(grads, dtype=np.float64)
        if ids.shape != grads.shape:
            raise ValueError("ids and grads must align")
        bad = ~np.isfinite(grads)
        if bad.any():
            raise ValueError(f"non-finite gradient for parameter {int(ids[np.argmax(bad)])}")
        h = self.hyper
        self.global_step += 1
        t = self.global_step
        if ids.size:
            elapsed = (t - self.last_step[ids]).astype(np.float64)
            self.m[ids] = self.m[ids] * h.beta1 ** elapsed + (1.0 - h.beta1) * grads
            self.v[ids] = self.v[ids] * h.beta2 ** elapsed + (1.0 - h.beta2) * grads * grads
            self.last_step[ids] = t
            m_hat = self.m[ids] / (1.0 - h.beta1 ** t)
            v_hat = self.v[ids] / (1.0 - h.beta2 ** t)
            params[ids] -= h.lr * m_hat / (np.sqrt(v_hat) + h.eps)
            if self.clamp is not None:
                params[ids] = np.clip(params[ids], self.clamp[0], self.clamp[1])
