import math
import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def qp_dual_objective(K: np.ndarray, y: np.ndarray, C: float) -> float:
    """Independent brute-force oracle: solve the SVM dual with a generic QP
    solver and return the maximization objective sum(a) - 0.5 a'Qa."""

    from cvxopt import matrix, solvers

    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-10
    solvers.options["reltol"] = 1e-10
    solvers.options["feastol"] = 1e-10
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    sol = solvers.qp(
        matrix(Q + 1e-10 * np.eye(n)),
        matrix(-np.ones(n)),
        matrix(np.vstack([-np.eye(n), np.eye(n)])),
        matrix(np.hstack([np.zeros(n), C * np.ones(n)])),
        matrix(y.reshape(1, -1)),
        matrix(np.zeros(1)),
    )
    a = np.array(sol["x"]).ravel()
    return float(np.sum(a) - 0.5 * a @ Q @ a)


def oracle_median_gamma(X: np.ndarray) -> float:
    """Median-distance bandwidth recomputed independently of the library."""

    dists = []
    for i in range(len(X)):
        for j in range(i + 1, len(X)):
            dists.append(math.dist(X[i], X[j]))
    med = sorted(dists)[len(dists) // 2] if len(dists) % 2 else 0.5 * (
        sorted(dists)[len(dists) // 2 - 1] + sorted(dists)[len(dists) // 2]
    )
    if med < 1e-12:
        return 1.0
    return 1.0 / (2.0 * med * med)


def oracle_qp_predictor(X_tr, y_tr, C, gamma):
    """Train via the QP oracle; return a decision-value function."""

    from cvxopt import matrix, solvers

    solvers.options["show_progress"] = False
    X_tr = np.asarray(X_tr, dtype=np.float64)
    n = len(y_tr)

    def k(a, b):
        d = np.sum(a * a, 1)[:, None] + np.sum(b * b, 1)[None, :] - 2 * a @ b.T
        return np.exp(-gamma * np.maximum(d, 0))

    K = k(X_tr, X_tr)
    Q = (y_tr[:, None] * y_tr[None, :]) * K
    sol = solvers.qp(
        matrix(Q + 1e-10 * np.eye(n)),
        matrix(-np.ones(n)),
        matrix(np.vstack([-np.eye(n), np.eye(n)])),
        matrix(np.hstack([np.zeros(n), C * np.ones(n)])),
        matrix(np.asarray(y_tr, dtype=np.float64).reshape(1, -1)),
        matrix(np.zeros(1)),
    )
    a = np.array(sol["x"]).ravel()
    free = (a > 1e-6) & (a < C - 1e-6)
    u = K @ (a * y_tr)
    if np.any(free):
        b = float(np.mean(y_tr[free] - u[free]))
    else:
        b = float(np.mean(y_tr - u))

    def decision(points):
        return k(np.atleast_2d(np.asarray(points, dtype=np.float64)), X_tr) @ (a * y_tr) + b

    return decision


def half_plane_dataset(n: int, seed: int, margin: float = 0.05):
    """Points in the unit square labeled yellow left of x=0.5 with a margin."""

    from selfcal.core import Meaning

    rng = random.Random(seed)
    data = []
    for _ in range(n):
        if rng.random() < 0.5:
            x = rng.uniform(0.0, 0.5 - margin)
            label = Meaning.YELLOW
        else:
            x = rng.uniform(0.5 + margin, 1.0)
            label = Meaning.GREY
        data.append(((x, rng.uniform(0.0, 1.0)), label))
    return data


@pytest.fixture
def engine_config():
    from selfcal.core import EngineConfig

    return EngineConfig()
