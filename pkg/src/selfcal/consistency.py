"""Consistency scoring for continuous signals, plus the cluster-first baseline.

A hypothesis labeling is "consistent" when a regularized classifier trained
on it generalizes well, i.e. the implied color map is simple.  The score is
the cross-validated accuracy of the RBF SVM on the hypothetically labeled
dataset.

The score is exactly invariant to flipping every label and to permuting the
dataset: labels are canonicalized to +/-1 by comparing the two class point
multisets, and fold assignment is derived from a content-seeded shuffle
rather than input order.
"""

from __future__ import annotations

import hashlib
import random
import struct
from typing import Optional, Sequence

import numpy as np

from .core import (
    NUM_DIGITS,
    EngineConfig,
    InteractionEvent,
    Meaning,
)
from .svm import rbf_kernel, resolve_gamma, solve_dual


def _canonical_signs(point_tuples: list[tuple], labels: Sequence[Meaning]) -> np.ndarray:
    """Map meanings to +/-1 so that complementary labelings coincide.

    The class whose sorted point multiset is lexicographically smaller gets
    +1; on a full tie the problem is symmetric and the choice is irrelevant.
    """

    yellow_pts = sorted(t for t, m in zip(point_tuples, labels) if m is Meaning.YELLOW)
    grey_pts = sorted(t for t, m in zip(point_tuples, labels) if m is Meaning.GREY)
    plus = Meaning.YELLOW if yellow_pts <= grey_pts else Meaning.GREY
    return np.array([1.0 if m is plus else -1.0 for m in labels])


def _content_seed(point_tuples: list[tuple], signs: np.ndarray, order: list[int]) -> int:
    h = hashlib.sha256()
    for i in order:
        h.update(struct.pack(f"<{len(point_tuples[i])}d", *point_tuples[i]))
        h.update(b"+" if signs[i] > 0 else b"-")
    return int.from_bytes(h.digest()[:8], "big")


def _fold_assignment(
    point_tuples: list[tuple],
    signs: np.ndarray,
    n_folds: int,
    candidates: list[int],
) -> list[list[int]]:
    """Stratified folds over ``candidates``, independent of dataset order
    and of label polarity.  The content seed covers the whole dataset so a
    settled prefix still influences (deterministically) how the rest is
    split."""

    order = sorted(candidates, key=lambda i: (point_tuples[i], signs[i]))
    full_order = sorted(
        range(len(point_tuples)), key=lambda i: (point_tuples[i], signs[i])
    )
    rng = random.Random(_content_seed(point_tuples, signs, full_order))
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (1.0, -1.0):
        members = [i for i in order if signs[i] == cls]
        rng.shuffle(members)
        for pos, i in enumerate(members):
            folds[pos % n_folds].append(i)
    return [f for f in folds if f]


def cross_val_accuracy(
    X: np.ndarray, signs: np.ndarray, folds: list[list[int]], C: float, gamma: float
) -> float:
    """Fraction of held-out points classified strictly on their own side.

    A tie (decision value exactly zero) counts as wrong: it carries no
    evidence that the labeling is separable, and counting it symmetrically
    keeps label-swap invariance exact.  Folds whose training side contains
    a single class are skipped entirely: no classifier can be trained, so
    they are evidence neither for nor against the labeling (this protects a
    labeling with a lone minority point from an automatic miss).
    """

    n = len(X)
    K = rbf_kernel(X, X, gamma)
    correct = 0
    counted = 0
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        train_idx = np.flatnonzero(mask)
        y_tr = signs[train_idx]
        if len(train_idx) == 0 or np.all(y_tr == y_tr[0]):
            continue
        K_tr = K[np.ix_(train_idx, train_idx)]
        alpha, bias, _ = solve_dual(K_tr, y_tr, C)
        f_held = K[np.ix_(fold, train_idx)] @ (alpha * y_tr) + bias
        correct += int(np.sum(signs[fold] * f_held > 0.0))
        counted += len(fold)
    if counted == 0:
        return 1.0
    return correct / counted


def consistency_score_xy(
    X: np.ndarray,
    labels: Sequence[Meaning],
    config: EngineConfig,
    n_settled: int = 0,
) -> float:
    """Array-level scoring used by the engine's step loop.

    The first ``n_settled`` rows are treated as settled ground truth shared
    by every hypothesis: they always sit in the training side and are never
    held out, so the score measures how well the hypothesis explains the
    points that can still discriminate between hypotheses.  With
    ``n_settled == 0`` this is plain cross-validation over the dataset.
    """

    n = len(labels)
    held = list(range(n_settled, n))
    if n < 2 or not held:
        return 1.0
    if len(set(labels)) < 2:
        return 1.0
    X = np.asarray(X, dtype=np.float64)
    point_tuples = [tuple(row) for row in X]
    signs = _canonical_signs(point_tuples, labels)
    gamma = resolve_gamma(config.rbf_gamma, X)
    if len(held) < 2 * config.cv_folds:
        folds = [[i] for i in held]
    else:
        folds = _fold_assignment(point_tuples, signs, config.cv_folds, held)
    return cross_val_accuracy(X, signs, folds, config.svm_c, gamma)


def consistency_score(data, config: EngineConfig) -> float:
    """Cross-validation accuracy of the RBF SVM on (vector, Meaning) pairs.

    Total function: datasets with fewer than two points or a single class
    score 1.0 - a hypothesis is consistent until the data breaches it.
    """

    data = list(data)
    if len(data) < 2:
        return 1.0
    X = np.vstack([np.asarray(v, dtype=np.float64).ravel() for v, _ in data])
    labels = [m for _, m in data]
    return consistency_score_xy(X, labels, config)


def two_means(
    points: np.ndarray, seed: int = 0, restarts: int = 10, max_iter: int = 100
) -> np.ndarray:
    """Deterministic 2-means: seeded initializations, best inertia wins."""

    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = len(X)
    best_labels = np.zeros(n, dtype=np.int64)
    best_inertia = np.inf
    for r in range(restarts):
        rng = random.Random(seed * 1009 + r)
        i0 = rng.randrange(n)
        i1 = rng.randrange(n)
        if i1 == i0:
            i1 = (i0 + 1) % n
        centers = X[[i0, i1]].copy()
        labels: Optional[np.ndarray] = None
        for _ in range(max_iter):
            d0 = np.sum((X - centers[0]) ** 2, axis=1)
            d1 = np.sum((X - centers[1]) ** 2, axis=1)
            new_labels = (d1 < d0).astype(np.int64)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in (0, 1):
                member = X[labels == c]
                if len(member):
                    centers[c] = member.mean(axis=0)
        assert labels is not None
        inertia = float(np.sum((X - centers[labels]) ** 2))
        if inertia < best_inertia - 1e-12:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def unsupervised_baseline(
    points, history: Sequence[InteractionEvent]
) -> Optional[int]:
    """Cluster-first foil: find 2 clusters, try both cluster-to-color maps.

    For each assignment the interaction history is replayed as if the
    cluster colors were the user's meanings, eliminating digits whose
    displayed color ever disagrees.  Returns a digit only when exactly one
    digit survives under exactly one assignment; unstructured or deceptive
    data leaves this undecided or wrong by construction.
    """

    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(X) < 2:
        raise ValueError("baseline needs at least 2 points")
    if len(X) != len(history):
        raise ValueError("points and history must align one-to-one")
    cluster = two_means(X)
    resolved: set[int] = set()
    for assignment in (
        (Meaning.YELLOW, Meaning.GREY),
        (Meaning.GREY, Meaning.YELLOW),
    ):
        meanings = [assignment[c] for c in cluster]
        survivors = {
            d
            for d in range(NUM_DIGITS)
            if all(ev.coloring[d] is meanings[k] for k, ev in enumerate(history))
        }
        if len(survivors) == 1:
            resolved.add(next(iter(survivors)))
    if len(resolved) == 1:
        return next(iter(resolved))
    return None
