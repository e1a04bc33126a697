"""Plane-to-image homography estimation from noisy correspondences.

The template plane of a reference face (millimeters) is mapped to the
image plane (pixels) by a 3x3 projective matrix, estimated with the
normalized direct linear transform inside a seeded RANSAC loop.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateConfiguration,
    InsufficientPoints,
    MappedToInfinity,
    NoConsensus,
    ParseError,
)
from .geometry import Homog3

# Rank test on the unit-Frobenius matrix; below this the map is not
# invertible in any usable sense.
MIN_CANONICAL_DET = 1e-10

# Relative sigma_8/sigma_1 cutoff for the DLT design matrix.
DLT_RANK_EPS = 1e-9

# Relative triangle-area cutoff for degenerate minimal samples.
COLLINEAR_AREA_EPS = 1e-6


@dataclass(frozen=True)
class Correspondence:
    """One template point (mm) matched to one image point (px)."""

    template: tuple[float, float]
    image: tuple[float, float]

    def __post_init__(self):
        for v in (*self.template, *self.image):
            if not math.isfinite(v):
                raise ValueError("correspondence coordinates must be finite")


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective map in canonical scale.

    Canonical scale means Frobenius norm 1 with the sign fixed so the
    largest-magnitude entry is positive; two estimates of the same map
    then compare directly entry by entry.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("homography matrix must be 3x3")
        norm = float(np.linalg.norm(m))
        if norm == 0.0:
            raise DegenerateConfiguration("zero homography matrix")
        m = m / norm
        flat = np.abs(m).argmax()
        if m.flat[flat] < 0:
            m = -m
        if abs(float(np.linalg.det(m))) <= MIN_CANONICAL_DET:
            raise DegenerateConfiguration("homography matrix is rank deficient")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def pixel_scale(self) -> float:
        """Global template-to-image scale factor of the map.

        The determinant of the matrix rescaled to unit lower-right entry
        is the squared area scale of the underlying affinity; identity
        maps give exactly 1.
        """
        m = self.m
        if abs(m[2, 2]) > 1e-12:
            return math.sqrt(abs(float(np.linalg.det(m / m[2, 2]))))
        return math.sqrt(abs(float(np.linalg.det(m))))


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float = 3.0
    confidence: float = 0.999
    max_iterations: int = 2000
    min_inliers: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        if self.inlier_threshold <= 0.0:
            raise ValueError("inlier_threshold must be positive")
        if self.min_inliers < 4:
            raise ValueError("min_inliers must be at least 4")


@dataclass(frozen=True)
class EstimateReport:
    homography: Homography
    inlier_mask: tuple[bool, ...]
    mean_inlier_error: float
    iterations_run: int


def _as_arrays(corrs) -> tuple[np.ndarray, np.ndarray]:
    tpl = np.array([c.template for c in corrs], dtype=float)
    img = np.array([c.image for c in corrs], dtype=float)
    return tpl, img


def _hartley_transform(pts: np.ndarray) -> np.ndarray:
    """Similarity bringing points to zero centroid and mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    mean_dist = float(np.linalg.norm(pts - centroid, axis=1).mean())
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("points are coincident")
    s = math.sqrt(2.0) / mean_dist
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def _apply_affine(t: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return pts @ t[:2, :2].T + t[:2, 2]


def estimate_dlt(corrs) -> Homography:
    """Least-squares homography via the normalized direct linear transform.

    Args:
        corrs: at least four Correspondence items.

    Returns:
        The canonicalized Homography minimizing the algebraic error.
    """
    if len(corrs) < 4:
        raise InsufficientPoints(f"need at least 4 correspondences, got {len(corrs)}")
    tpl, img = _as_arrays(corrs)
    t_tpl = _hartley_transform(tpl)
    t_img = _hartley_transform(img)
    tn = _apply_affine(t_tpl, tpl)
    im = _apply_affine(t_img, img)

    n = len(corrs)
    a = np.zeros((2 * n, 9))
    x, y = tn[:, 0], tn[:, 1]
    u, v = im[:, 0], im[:, 1]
    ones = np.ones(n)
    a[0::2] = np.column_stack([x, y, ones, 0 * x, 0 * x, 0 * x, -u * x, -u * y, -u])
    a[1::2] = np.column_stack([0 * x, 0 * x, 0 * x, x, y, ones, -v * x, -v * y, -v])

    _, sing, vt = np.linalg.svd(a)
    if sing[7] <= DLT_RANK_EPS * sing[0]:
        raise DegenerateConfiguration("correspondences are collinear or coincident")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_img) @ hn @ t_tpl
    return Homography(h)


def _map_points(m: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply a 3x3 map to inhomogeneous points; returns (xy, |w|) arrays."""
    q = pts @ m[:, :2].T + m[:, 2]
    w = q[:, 2]
    safe = np.abs(w) > 1e-12
    xy = np.empty_like(pts)
    xy[safe] = q[safe, :2] / w[safe, None]
    xy[~safe] = np.inf
    return xy, np.abs(w)


def _transfer_errors(h: Homography, tpl: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Symmetric transfer error per correspondence, in pixels.

    Forward residuals are native pixels; backward residuals live in
    template millimeters and are converted with the map's global pixel
    scale so one threshold works for every face. Points mapped to
    infinity get an infinite error.
    """
    scale = h.pixel_scale()
    fwd_xy, fwd_w = _map_points(h.m, tpl)
    bwd_xy, bwd_w = _map_points(np.linalg.inv(h.m), img)
    fwd = np.linalg.norm(fwd_xy - img, axis=1)
    bwd = np.linalg.norm(bwd_xy - tpl, axis=1) * scale
    err = fwd + bwd
    err[(fwd_w <= 1e-12) | (bwd_w <= 1e-12)] = np.inf
    return err


def transfer_error(h: Homography, corr: Correspondence) -> float:
    """Symmetric transfer error of a single correspondence, in pixels."""
    tpl = np.array([corr.template], dtype=float)
    img = np.array([corr.image], dtype=float)
    err = float(_transfer_errors(h, tpl, img)[0])
    if not math.isfinite(err):
        raise MappedToInfinity("correspondence maps to an ideal point")
    return err


def _has_collinear_triple(pts: np.ndarray) -> bool:
    """True when any 3 of the 4 points are (near) collinear."""
    dmax = max(
        float(np.linalg.norm(pts[i] - pts[j])) for i in range(4) for j in range(i + 1, 4)
    )
    if dmax < 1e-12:
        return True
    limit = COLLINEAR_AREA_EPS * dmax * dmax
    idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    for i, j, k in idx:
        u = pts[j] - pts[i]
        w = pts[k] - pts[i]
        area = abs(float(u[0] * w[1] - u[1] * w[0]))
        if area <= limit:
            return True
    return False


def ransac_homography(corrs, cfg: RansacConfig) -> EstimateReport:
    """Robust homography fit by seeded random sample consensus.

    Minimal 4-point hypotheses are scored by symmetric transfer error;
    the iteration budget adapts to the observed inlier ratio and the
    requested confidence. The winning consensus set is refit once with
    the full least-squares estimator.

    The sample drawn at each attempt depends only on (seed, attempt
    index), so runs are reproducible regardless of scheduling.
    """
    n = len(corrs)
    if n < max(4, cfg.min_inliers):
        raise InsufficientPoints(
            f"need at least {max(4, cfg.min_inliers)} correspondences, got {n}"
        )
    tpl, img = _as_arrays(corrs)

    best_count = 0
    best_err_sum = math.inf
    best_mask: np.ndarray | None = None
    needed = cfg.max_iterations
    iterations = 0
    attempts = 0
    max_attempts = max(10 * cfg.max_iterations, 1000)

    while iterations < min(needed, cfg.max_iterations) and attempts < max_attempts:
        rng = np.random.default_rng((cfg.seed, attempts))
        attempts += 1
        idx = rng.choice(n, size=4, replace=False)
        # Degenerate samples are skipped without consuming an iteration.
        if _has_collinear_triple(tpl[idx]) or _has_collinear_triple(img[idx]):
            continue
        try:
            h = estimate_dlt([corrs[i] for i in idx])
        except DegenerateConfiguration:
            continue
        iterations += 1

        err = _transfer_errors(h, tpl, img)
        mask = err < cfg.inlier_threshold
        count = int(mask.sum())
        err_sum = float(err[mask].sum())
        if count < 4:
            continue
        if count > best_count or (count == best_count and err_sum < best_err_sum):
            best_count = count
            best_err_sum = err_sum
            best_mask = mask
            w = count / n
            if w >= 1.0:
                needed = iterations
            else:
                needed = math.ceil(
                    math.log(1.0 - cfg.confidence) / math.log(1.0 - w**4)
                )

    if best_mask is None or best_count < cfg.min_inliers:
        raise NoConsensus(
            f"best consensus has {best_count} inliers, fewer than the required "
            f"{cfg.min_inliers}; correspondences are unusable"
        )

    consensus = [c for c, keep in zip(corrs, best_mask) if keep]
    refit = estimate_dlt(consensus)
    final_err = _transfer_errors(refit, tpl[best_mask], img[best_mask])
    return EstimateReport(
        homography=refit,
        inlier_mask=tuple(bool(b) for b in best_mask),
        mean_inlier_error=float(final_err.mean()),
        iterations_run=iterations,
    )


def apply_point(h: Homography, p: Homog3) -> Homog3:
    """Image of a point under the map (unnormalized)."""
    return Homog3.from_vec(h.m @ p.vec)


def map_line(h: Homography, line: Homog3) -> Homog3:
    """Image of a line under the map: inverse transpose applied to it."""
    return Homog3.from_vec(np.linalg.inv(h.m).T @ line.vec)


CSV_HEADER = ("tx", "ty", "ix", "iy")


def read_correspondences_csv(path: str | Path) -> list[Correspondence]:
    """Load correspondences from a UTF-8 CSV with header ``tx,ty,ix,iy``.

    Units are template millimeters and image pixels; lines starting with
    ``#`` are comments.
    """
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            rows.append(stripped)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    header = tuple(part.strip() for part in rows[0].split(","))
    if header != CSV_HEADER:
        raise ParseError(f"{path}: expected header 'tx,ty,ix,iy', got {rows[0]!r}")
    corrs = []
    for lineno, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            tx, ty, ix, iy = (float(part) for part in parts)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        try:
            corrs.append(Correspondence(template=(tx, ty), image=(ix, iy)))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return corrs


def write_correspondences_csv(path: str | Path, corrs) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for c in corrs:
            writer.writerow([repr(v) for v in (*c.template, *c.image)])
