"""One-hidden-layer ReLU network trained with Adam (numpy only).

Defaults mirror the common "out of the box" multilayer perceptron: 100
hidden units, L2 penalty 1e-4, learning rate 1e-3, minibatches of
``min(200, n)``, at most 200 epochs, and early stopping once the training
loss fails to improve by ``tol`` for ``n_iter_no_change`` epochs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError


@dataclass(frozen=True)
class MLPConfig:
    hidden: int = 100
    max_epochs: int = 200
    batch_size: int = 200
    learning_rate: float = 1e-3
    alpha: float = 1e-4
    tol: float = 1e-4
    n_iter_no_change: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class ShallowNetClassifier:
    def __init__(self, config: MLPConfig | None = None, seed: int = 0):
        self.config = config or MLPConfig()
        self.seed = seed
        self.params = None
        self.classes_ = None
        self.loss_curve_ = []

    def _init(self, n_in, n_out, rng):
        h = self.config.hidden
        # Glorot-uniform bounds as used for ReLU layers
        b1 = np.sqrt(6.0 / (n_in + h))
        b2 = np.sqrt(6.0 / (h + n_out))
        return [
            rng.uniform(-b1, b1, (n_in, h)),
            rng.uniform(-b1, b1, h),
            rng.uniform(-b2, b2, (h, n_out)),
            rng.uniform(-b2, b2, n_out),
        ]

    def _forward(self, X):
        W1, c1, W2, c2 = self.params
        a = np.maximum(X @ W1 + c1, 0.0)
        return a, _softmax(a @ W2 + c2)

    def fit(self, X, y):
        cfg = self.config
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_, yi = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise DegenerateModelError(
                f"attack target has a single class ({self.classes_.tolist()}); nothing to learn"
            )
        n, n_in = X.shape
        K = self.classes_.shape[0]
        rng = np.random.default_rng(self.seed)
        self.params = self._init(n_in, K, rng)
        m = [np.zeros_like(p) for p in self.params]
        v = [np.zeros_like(p) for p in self.params]
        Y = np.eye(K)[yi]
        batch = min(cfg.batch_size, n)
        step = 0
        best = np.inf
        stale = 0
        self.loss_curve_ = []
        for _ in range(cfg.max_epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, batch):
                b = order[start:start + batch]
                xb, yb = X[b], Y[b]
                W1, c1, W2, c2 = self.params
                a, p = self._forward(xb)
                nb = b.shape[0]
                total += -np.sum(yb * np.log(np.clip(p, 1e-10, 1.0)))
                total += 0.5 * cfg.alpha * (np.sum(W1 * W1) + np.sum(W2 * W2)) * nb / n
                dz2 = (p - yb) / nb
                gW2 = a.T @ dz2 + cfg.alpha * W2 / nb
                gc2 = dz2.sum(axis=0)
                da = dz2 @ W2.T
                da[a <= 0] = 0.0
                gW1 = xb.T @ da + cfg.alpha * W1 / nb
                gc1 = da.sum(axis=0)
                step += 1
                lr = cfg.learning_rate * np.sqrt(1 - cfg.beta2 ** step) / (1 - cfg.beta1 ** step)
                for i, g in enumerate((gW1, gc1, gW2, gc2)):
                    m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g
                    v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g
                    self.params[i] = self.params[i] - lr * m[i] / (np.sqrt(v[i]) + cfg.epsilon)
            loss = total / n
            self.loss_curve_.append(loss)
            if loss > best - cfg.tol:
                stale += 1
            else:
                stale = 0
            best = min(best, loss)
            if stale > cfg.n_iter_no_change:
                break
        return self

    def predict_proba(self, X) -> np.ndarray:
        if self.params is None:
            raise RuntimeError("classifier is not fitted")
        return self._forward(np.asarray(X, dtype=np.float64))[1]

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
