"""Feature pipelines turning sketches and audio into low-dimensional signals.

Sketches are single-stroke polylines reduced to a 17-number summary that is
robust to translation and uniform scaling (not rotation).  Audio clips are
tiled to 3 seconds, cut into 21 overlapping 1-second windows, embedded per
window, and the whole session's window set is projected to 2-D with the
per-clip window projections averaged back into one point per clip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    DimensionMismatch,
    EmbedderFailure,
    EmptyClip,
    ProjectionKind,
    TooFewPoints,
)

SKETCH_FEATURE_DIM = 17
GRID_SIZE = 3
AUDIO_WINDOW_COUNT = 21
AUDIO_CLIP_SECONDS = 3
AUDIO_WINDOW_SECONDS = 1

# An embedder maps (one-second sample window, sample_rate) to a fixed-length
# real vector.  Failures must surface; a window is never silently zeroed.
Embedder = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class Polyline:
    """One pen stroke: at least two ordered points, duplicates allowed."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise TooFewPoints("a stroke needs at least 2 points")
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
            raise ValueError("stroke coordinates must be finite")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class SketchFeatures:
    start_x: float
    start_y: float
    end_x: float
    end_y: float
    delta_x: float
    delta_y: float
    start_end_distance: float
    path_length: float
    grid_fractions: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.grid_fractions) != GRID_SIZE * GRID_SIZE:
            raise ValueError("expected 9 grid fractions")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.start_x,
                self.start_y,
                self.end_x,
                self.end_y,
                self.delta_x,
                self.delta_y,
                self.start_end_distance,
                self.path_length,
                *self.grid_fractions,
            ]
        )


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64).ravel()
        if not isinstance(self.sample_rate, int) or self.sample_rate <= 0:
            raise ValueError("sample_rate must be a positive integer")
        if len(self.samples) == 0:
            raise EmptyClip("audio clip has no samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio samples must be finite")


def normalize_sketch(p: Polyline) -> Polyline:
    """Translate and uniformly scale so the bounding box fits [-1, 1]^2.

    One scale factor for both axes keeps the aspect ratio; a degenerate
    bounding box (a single repeated point) collapses to the origin.
    """

    xs = [x for x, _ in p.points]
    ys = [y for _, y in p.points]
    cx = (min(xs) + max(xs)) / 2.0
    cy = (min(ys) + max(ys)) / 2.0
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    if span == 0.0:
        return Polyline(tuple((0.0, 0.0) for _ in p.points))
    scale = 2.0 / span
    return Polyline(tuple(((x - cx) * scale, (y - cy) * scale) for x, y in p.points))


def _cell_index(x: float, y: float) -> int:
    """3x3 cell of [-1,1]^2; points exactly on a boundary go to the lower index."""

    third = 1.0 / 3.0
    col = 0 if x <= -third else (1 if x <= third else 2)
    row = 0 if y <= -third else (1 if y <= third else 2)
    return row * GRID_SIZE + col


def _split_points(a: float, b: float, lines: tuple[float, float]) -> list[float]:
    ts = []
    if a != b:
        for c in lines:
            t = (c - a) / (b - a)
            if 0.0 < t < 1.0:
                ts.append(t)
    return ts


def sketch_features(p: Polyline) -> SketchFeatures:
    """17-number sketch summary; expects a normalized polyline.

    Grid fractions are weighted by path length ("ink"), so they do not
    depend on how densely the stroke was sampled.  Segments are split at
    cell boundaries and each piece is attributed by its midpoint.
    """

    third = 1.0 / 3.0
    lines = (-third, third)
    sx, sy = p.points[0]
    ex, ey = p.points[-1]
    cell_len = [0.0] * (GRID_SIZE * GRID_SIZE)
    total = 0.0
    for (x0, y0), (x1, y1) in zip(p.points, p.points[1:]):
        ts = sorted(set(_split_points(x0, x1, lines) + _split_points(y0, y1, lines)))
        bounds = [0.0] + ts + [1.0]
        for t0, t1 in zip(bounds, bounds[1:]):
            ax, ay = x0 + (x1 - x0) * t0, y0 + (y1 - y0) * t0
            bx, by = x0 + (x1 - x0) * t1, y0 + (y1 - y0) * t1
            length = math.hypot(bx - ax, by - ay)
            if length > 0.0:
                cell_len[_cell_index((ax + bx) / 2.0, (ay + by) / 2.0)] += length
                total += length
    if total > 0.0:
        fractions = tuple(c / total for c in cell_len)
    else:
        # Zero-ink stroke: all mass to the cell holding the point.
        fractions = tuple(
            1.0 if i == _cell_index(sx, sy) else 0.0 for i in range(GRID_SIZE * GRID_SIZE)
        )
    return SketchFeatures(
        start_x=sx,
        start_y=sy,
        end_x=ex,
        end_y=ey,
        delta_x=ex - sx,
        delta_y=ey - sy,
        start_end_distance=math.hypot(ex - sx, ey - sy),
        path_length=total,
        grid_fractions=fractions,
    )


def sketch_vector(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Raw stroke points -> normalized 17-D feature vector."""

    stroke = Polyline(tuple((float(x), float(y)) for x, y in points))
    return sketch_features(normalize_sketch(stroke)).as_vector()


def project_2d(
    data,
    method: ProjectionKind = ProjectionKind.PRINCIPAL_COMPONENTS,
    external: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Project an N x D dataset to N x 2.

    Principal components: center the columns and project onto the top-2
    right singular directions, signs fixed so the largest-magnitude loading
    is positive.  External: pass-through for an embedding computed outside
    (matching row count), e.g. a nonlinear projection supplied by a caller.
    """

    X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if X.shape[1] < 2:
        raise DimensionMismatch("projection input must have at least 2 columns")
    if not np.all(np.isfinite(X)):
        raise ValueError("projection input must be finite")
    n = X.shape[0]
    if method is ProjectionKind.EXTERNAL_2D:
        if external is None:
            raise DimensionMismatch("external projection requires an embedding")
        E = np.atleast_2d(np.asarray(external, dtype=np.float64))
        if E.shape != (n, 2):
            raise DimensionMismatch(f"external embedding must be {n}x2, got {E.shape}")
        return E.copy()
    if n == 1:
        return np.zeros((1, 2))
    Xc = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    V = vt[:2].copy()
    for i in range(2):
        k = int(np.argmax(np.abs(V[i])))
        if V[i, k] < 0.0:
            V[i] = -V[i]
    return Xc @ V.T


def audio_windows(clip: AudioClip) -> list[np.ndarray]:
    """Exactly 21 one-second windows with 100 ms hop over a 3-second buffer.

    The clip is repeated (or truncated) to exactly 3 seconds first, so any
    input duration yields the same window layout.
    """

    sr = clip.sample_rate
    target = AUDIO_CLIP_SECONDS * sr
    reps = -(-target // len(clip.samples))
    buf = np.tile(clip.samples, reps)[:target]
    win = AUDIO_WINDOW_SECONDS * sr
    starts = [(k * sr) // 10 for k in range(AUDIO_WINDOW_COUNT)]
    return [buf[s : s + win] for s in starts]


class SpectralBandEmbedder:
    """Deterministic stand-in embedder: log energies of spectral bands.

    Stands in for a pretrained audio network; the engine only needs a
    fixed-length vector per window whose geometry separates distinct sounds.
    """

    def __init__(self, bands: int = 16):
        if bands < 1:
            raise ValueError("bands must be >= 1")
        self.bands = bands

    def __call__(self, window: np.ndarray, sample_rate: int) -> np.ndarray:
        spectrum = np.abs(np.fft.rfft(np.asarray(window, dtype=np.float64)))
        chunks = np.array_split(spectrum, self.bands)
        energies = np.array([np.sqrt(np.mean(c**2)) if len(c) else 0.0 for c in chunks])
        return np.log1p(energies)


def embed_clip(clip: AudioClip, embedder: Embedder) -> np.ndarray:
    """One clip -> (21, E) window embedding matrix."""

    rows = []
    for window in audio_windows(clip):
        try:
            vec = np.asarray(embedder(window, clip.sample_rate), dtype=np.float64).ravel()
        except Exception as exc:
            raise EmbedderFailure(f"embedder failed: {exc}") from exc
        if not np.all(np.isfinite(vec)):
            raise EmbedderFailure("embedder produced non-finite values")
        rows.append(vec)
    dims = {len(r) for r in rows}
    if len(dims) != 1:
        raise EmbedderFailure(f"embedder returned mixed dimensions: {sorted(dims)}")
    return np.vstack(rows)


def embed_and_project(
    clips: Sequence[AudioClip],
    embedder: Embedder,
    method: ProjectionKind = ProjectionKind.PRINCIPAL_COMPONENTS,
    external: Optional[np.ndarray] = None,
) -> np.ndarray:
    """N clips -> N x 2: embed each window, project all windows, average per clip."""

    if len(clips) == 0:
        raise EmptyClip("no clips to embed")
    mats = [embed_clip(c, embedder) for c in clips]
    dims = {m.shape[1] for m in mats}
    if len(dims) != 1:
        raise EmbedderFailure(f"clips embedded with mixed dimensions: {sorted(dims)}")
    stacked = np.vstack(mats)
    projected = project_2d(stacked, method=method, external=external)
    return projected.reshape(len(clips), AUDIO_WINDOW_COUNT, 2).mean(axis=1)
