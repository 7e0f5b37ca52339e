"""Shared test helpers.

The pseudoinverse oracle here deliberately uses the reciprocal-singular-value
route so library results are checked against an independent construction.
"""

import numpy as np


def make_psd(rng, n, rank, lo=0.5, hi=2.0):
    """Random symmetric PSD matrix with exact rank via Q diag(d) Q^T."""
    q = random_orthonormal(rng, n, n)
    d = np.zeros(n)
    d[:rank] = rng.uniform(lo, hi, rank)
    m = (q * d) @ q.T
    return 0.5 * (m + m.T)


def random_orthonormal(rng, n, k):
    """Orthonormal n x k frame from a Gaussian draw, sign-fixed QR."""
    a = rng.standard_normal((n, k))
    q, r = np.linalg.qr(a)
    return q * np.where(np.diag(r) < 0.0, -1.0, 1.0)


def svd_pinv_oracle(a):
    """Pseudoinverse by inverting singular values above a relative cutoff."""
    a = np.asarray(a, dtype=float)
    u, s, vh = np.linalg.svd(a)
    cutoff = s[0] * max(a.shape) * 1e-10 if s.size else 0.0
    keep = s > cutoff
    return (vh[keep].T / s[keep]) @ u[:, keep].T
