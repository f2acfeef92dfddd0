"""Pure numpy implementations of the compiled kernels in ``_ckernels.pyx``.

Signatures are identical so :mod:`lediflow.kernels` can swap one for the other.
"""

import numpy as np


def silu_forward(pre, out, sig):
    np.negative(pre, out=sig)
    # exp overflow to inf is harmless: the reciprocal below maps it to 0
    with np.errstate(over="ignore"):
        np.exp(sig, out=sig)
    sig += 1.0
    np.reciprocal(sig, out=sig)
    np.multiply(pre, sig, out=out)


def silu_backward(grad, pre, sig, out):
    # s + a*s*(1-s)
    np.subtract(1.0, sig, out=out)
    out *= pre
    out += 1.0
    out *= sig
    out *= grad


def adamw_update(param, grad, m, v, lr, beta1, beta2, eps, weight_decay, bc1, bc2):
    dtype = param.dtype
    m *= dtype.type(beta1)
    m += dtype.type(1.0 - beta1) * grad
    v *= dtype.type(beta2)
    v += dtype.type(1.0 - beta2) * grad * grad
    if weight_decay:
        param *= dtype.type(1.0 - lr * weight_decay)
    denom = np.sqrt(v) / dtype.type(np.sqrt(bc2)) + dtype.type(eps)
    param -= dtype.type(lr / bc1) * m / denom


def rbf_pair_sum(a, b, gamma, skip_diagonal, block=1024):
    total = 0.0
    b_sq = np.einsum("ij,ij->i", b, b)
    for start in range(0, a.shape[0], block):
        chunk = a[start:start + block]
        dist = np.einsum("ij,ij->i", chunk, chunk)[:, None] + b_sq[None, :] - 2.0 * chunk @ b.T
        np.maximum(dist, 0.0, out=dist)
        k = np.exp(-gamma * dist)
        if skip_diagonal:
            rows = np.arange(chunk.shape[0])
            cols = rows + start
            keep = cols < b.shape[0]
            k[rows[keep], cols[keep]] = 0.0
        total += float(k.sum())
    return total
