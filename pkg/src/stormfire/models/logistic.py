"""L2-regularized logistic regression on standardized features, fit by
full-batch gradient descent with backtracking line search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LogisticConfig:
    l2: float = 1e-4
    max_iter: int = 500
    grad_tol: float = 1e-6


@dataclass
class LogisticModel:
    weights: np.ndarray  # (d,)
    bias: float
    feature_mean: np.ndarray
    feature_sd: np.ndarray
    names: list[str] = field(default_factory=list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        Z = (np.asarray(X, dtype=np.float64) - self.feature_mean) / self.feature_sd
        return _sigmoid(Z @ self.weights + self.bias)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(
    theta: np.ndarray, Z: np.ndarray, y01: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean log-loss plus 0.5*l2*||w||^2 (bias unpenalized) and its gradient
    with respect to theta = [w_1..w_d, bias]."""
    w, b = theta[:-1], theta[-1]
    z = Z @ w + b
    p = _sigmoid(z)
    # numerically safe log-loss: log(1+exp(-|z|)) + max(z,0) - z*y
    loss = float(np.mean(np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0) - z * y01))
    loss += 0.5 * l2 * float(w @ w)
    resid = p - y01
    grad_w = Z.T @ resid / len(y01) + l2 * w
    grad_b = float(resid.mean())
    return loss, np.concatenate([grad_w, [grad_b]])


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    cfg: LogisticConfig = LogisticConfig(),
    names: list[str] | None = None,
) -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=bool).astype(np.float64)
    if y01.min() == y01.max():
        raise ValueError("labels are single-class; cannot fit")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    Z = (X - mean) / sd

    theta = np.zeros(X.shape[1] + 1)
    loss, grad = loss_and_grad(theta, Z, y01, cfg.l2)
    step = 1.0
    for _ in range(cfg.max_iter):
        if float(np.linalg.norm(grad)) < cfg.grad_tol:
            break
        # Armijo backtracking keeps descent deterministic on any scaling.
        g2 = float(grad @ grad)
        while step > 1e-12:
            cand = theta - step * grad
            cand_loss, cand_grad = loss_and_grad(cand, Z, y01, cfg.l2)
            if cand_loss <= loss - 1e-4 * step * g2:
                break
            step *= 0.5
        theta, loss, grad = cand, cand_loss, cand_grad
        step = min(step * 2.0, 1e6)
    return LogisticModel(
        weights=theta[:-1],
        bias=float(theta[-1]),
        feature_mean=mean,
        feature_sd=sd,
        names=list(names or []),
    )
