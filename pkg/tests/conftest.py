"""Shared helpers: small random problem instances with frozen seeds."""

import numpy as np
import pytest

from disco import Dataset, LossKind, Objective, SparseBlock


def make_dense_instance(d, n, seed, lam=0.1, loss=LossKind.SQUARE, labels="regression"):
    """Dense random dataset plus matching objective. ``labels`` may be
    'regression' (planted linear model) or 'sign' (+-1, for logistic)."""
    rng = np.random.default_rng(seed)
    Xd = rng.standard_normal((d, n))
    w_star = rng.standard_normal(d) / np.sqrt(d)
    if labels == "sign":
        y = np.sign(Xd.T @ w_star + 0.3 * rng.standard_normal(n))
        y[y == 0] = 1.0
    else:
        y = Xd.T @ w_star + 0.1 * rng.standard_normal(n)
    X = SparseBlock.from_dense(Xd)
    ds = Dataset(X=X, y=y, d=d, n=n, source=f"dense(seed={seed})")
    obj = Objective(loss=loss, lam=lam, n=n, d=d)
    return ds, obj


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
