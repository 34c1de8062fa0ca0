"""Support vector machines on precomputed kernels.

The solver is sequential minimal optimization with maximal-violating-pair
working-set selection, operating directly on a kernel matrix.  One-vs-all
multiclass training reuses the same kernel for every binary subproblem, so
an expensive kernel (histogram intersection over many thousands of bins) is
computed once per descriptor rather than once per class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SvmError(ValueError):
    pass


def histogram_intersection_kernel(x: np.ndarray, z: np.ndarray | None = None,
                                  block: int = 128) -> np.ndarray:
    """K[i, j] = sum_k min(x[i, k], z[j, k]), computed in row blocks to keep
    the broadcast buffer small."""
    x = np.asarray(x, dtype=np.float64)
    z = x if z is None else np.asarray(z, dtype=np.float64)
    if x.ndim != 2 or z.ndim != 2 or x.shape[1] != z.shape[1]:
        raise SvmError(f"incompatible shapes {x.shape} and {z.shape}")
    n, m = x.shape[0], z.shape[0]
    out = np.empty((n, m))
    for start in range(0, n, block):
        stop = min(start + block, n)
        out[start:stop] = np.minimum(x[start:stop, None, :], z[None, :, :]).sum(axis=2)
    return out


def linear_kernel(x: np.ndarray, z: np.ndarray | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = x if z is None else np.asarray(z, dtype=np.float64)
    if x.ndim != 2 or z.ndim != 2 or x.shape[1] != z.shape[1]:
        raise SvmError(f"incompatible shapes {x.shape} and {z.shape}")
    return x @ z.T


@dataclass(frozen=True)
class BinarySvm:
    """Dual solution of one binary subproblem: `coef[i] = alpha_i * y_i`
    over the training set, so a decision value is K_cross @ coef + bias."""

    coef: np.ndarray
    bias: float
    iterations: int
    objective: float

    def decision_function(self, kernel_cross: np.ndarray) -> np.ndarray:
        return np.asarray(kernel_cross, dtype=np.float64) @ self.coef + self.bias


def svm_objective(kernel: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Dual objective sum(alpha) - 0.5 * (alpha y)' K (alpha y), maximized."""
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ kernel @ v)


def smo_solve(kernel: np.ndarray, y: np.ndarray, c: float = 100.0,
              tol: float = 1e-3, max_iter: int = 100_000) -> BinarySvm:
    """Maximize the dual with box constraint 0 <= alpha <= C and
    sum(alpha * y) = 0.

    Each step picks the maximal violating pair: i from the upper set with
    the largest y_i - G_i, j from the lower set with the smallest, where
    G = K (alpha y).  The pair condition max - min <= tol is the standard
    pairwise optimality certificate.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if kernel.shape != (n, n):
        raise SvmError(f"kernel shape {kernel.shape} does not match {n} labels")
    if not np.all(np.abs(y) == 1.0):
        raise SvmError("labels must be +1/-1")
    if np.all(y == y[0]):
        raise SvmError("both classes must be present")
    if c <= 0:
        raise SvmError("C must be positive")

    alpha = np.zeros(n)
    grad = np.zeros(n)  # G_i = sum_j alpha_j y_j K_ij
    pos = y > 0

    it = 0
    while it < max_iter:
        it += 1
        f = y - grad
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        i = int(np.flatnonzero(up)[np.argmax(f[up])])
        j = int(np.flatnonzero(low)[np.argmin(f[low])])
        m_up, m_low = f[i], f[j]
        if m_up - m_low <= tol:
            it -= 1
            break

        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if eta <= 1e-12:
            eta = 1e-12
        old_i, old_j = alpha[i], alpha[j]
        # Take the unconstrained pair step, then clip; a variable that leaves
        # the box is snapped exactly onto the bound and its partner is
        # recomputed from the conserved pair quantity.  Clipping the moving
        # variable against a derived bound instead can cancel to a zero step
        # when the partner sits within rounding distance of the box, which
        # stalls the whole solve.
        if y[i] != y[j]:
            step = (m_up - m_low) / eta if pos[i] else (m_low - m_up) / eta
            ai, aj = old_i + step, old_j + step
            diff = old_i - old_j
            if diff > 0:
                if aj < 0.0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0.0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > c:
                    ai, aj = c, c - diff
            else:
                if aj > c:
                    aj, ai = c, c + diff
        else:
            step = (m_up - m_low) / eta if pos[i] else (m_low - m_up) / eta
            ai, aj = old_i + step, old_j - step
            total = old_i + old_j
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
            else:
                if aj < 0.0:
                    aj, ai = 0.0, total
            if total > c:
                if aj > c:
                    aj, ai = c, total - c
            else:
                if ai < 0.0:
                    ai, aj = 0.0, total
        d_i, d_j = ai - old_i, aj - old_j
        alpha[i], alpha[j] = ai, aj
        grad += (d_i * y[i]) * kernel[:, i] + (d_j * y[j]) * kernel[:, j]

    f = y - grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(f[free].mean())
    else:
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        bias = float((f[up].max() + f[low].min()) / 2.0)

    return BinarySvm(coef=alpha * y, bias=bias, iterations=it,
                     objective=svm_objective(kernel, y, alpha))


@dataclass(frozen=True)
class OvaSvm:
    """One binary machine per class; column c of the decision matrix is the
    margin of class `class_labels[c]` against the rest."""

    machines: tuple[BinarySvm, ...]
    class_labels: tuple[int, ...]

    def decision_function(self, kernel_cross: np.ndarray) -> np.ndarray:
        cols = [m.decision_function(kernel_cross) for m in self.machines]
        return np.stack(cols, axis=1)


def train_ova_on_kernel(kernel: np.ndarray, labels: np.ndarray, c: float = 100.0,
                        tol: float = 1e-3) -> OvaSvm:
    labels = np.asarray(labels)
    classes = tuple(int(v) for v in np.unique(labels))
    if len(classes) < 2:
        raise SvmError("need at least two classes")
    machines = []
    for cls in classes:
        y = np.where(labels == cls, 1.0, -1.0)
        machines.append(smo_solve(kernel, y, c=c, tol=tol))
    return OvaSvm(machines=tuple(machines), class_labels=classes)
