"""Exemplar-based inpainting with patch non-local medians.

The hole is filled by alternating two steps that each lower the energy

    E(u, phi) = sum over patch centers x touching the hole of
                || patch(u, x) - patch(u, phi(x)) ||_1

1. nearest-neighbour search: for fixed ``u`` move every ``phi(x)`` to a
   fully known patch with smaller L1 distance (PatchMatch propagation and
   random search, or an exhaustive scan on small problems);
2. image update: for fixed ``phi`` set every hole pixel to the per-channel
   median of the values proposed by all patches covering it, which is the
   exact minimizer of the L1 energy.

The scheme runs coarse to fine on a 2x pyramid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import ndimage, sparse
from scipy.sparse.linalg import spsolve

from .errors import HoleTooLarge
from .imagecore import as_rgb
from .morphology import EIGHT

EXHAUSTIVE_LIMIT = 10_000
MAX_HOLE_FRACTION = 0.5


@dataclass
class InpaintProblem:
    image: np.ndarray
    hole: np.ndarray
    patch_side: int = 7
    levels: int | None = None
    iterations: int = 10
    seed: int = 0

    def __post_init__(self):
        self.image = as_rgb(self.image)
        self.hole = np.asarray(self.hole, dtype=bool)
        if self.hole.shape != self.image.shape[:2]:
            raise ValueError("hole and image dimensions differ")
        if self.patch_side < 3 or self.patch_side % 2 == 0:
            raise ValueError("patch_side must be odd and >= 3")
        if min(self.image.shape[:2]) < self.patch_side:
            raise ValueError("image smaller than one patch")


@dataclass
class CorrespondenceMap:
    """Maps each patch center ``(cy[i], cx[i])`` touching the hole to a known patch center."""

    cy: np.ndarray
    cx: np.ndarray
    ty: np.ndarray
    tx: np.ndarray
    dist: np.ndarray
    valid: np.ndarray = field(repr=False)
    radius: int = 3

    @property
    def energy(self) -> float:
        return float(self.dist.sum())

    def copy(self) -> "CorrespondenceMap":
        return CorrespondenceMap(self.cy.copy(), self.cx.copy(), self.ty.copy(), self.tx.copy(),
                                 self.dist.copy(), self.valid, self.radius)


@dataclass
class InpaintResult:
    image: np.ndarray
    phi: CorrespondenceMap
    levels: int
    # energy after every search and every update at the finest level
    energy_history: list = field(default_factory=list)


# --------------------------------------------------------------------------- kernels

@njit(cache=True)
def _patch_l1(img, ay, ax, by, bx, r, bound):
    s = 0.0
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            for c in range(img.shape[2]):
                s += abs(img[ay + dy, ax + dx, c] - img[by + dy, bx + dx, c])
            if s >= bound:
                return s
    return s


@njit(cache=True)
def _distances(img, cy, cx, ty, tx, r):
    out = np.empty(cy.size)
    for i in range(cy.size):
        out[i] = _patch_l1(img, cy[i], cx[i], ty[i], tx[i], r, np.inf)
    return out


@njit(cache=True)
def _try(img, i, y, x, cand_y, cand_x, valid, r, ty, tx, dist):
    h, w = valid.shape
    if cand_y < 0 or cand_y >= h or cand_x < 0 or cand_x >= w or not valid[cand_y, cand_x]:
        return
    if cand_y == ty[i] and cand_x == tx[i]:
        return
    d = _patch_l1(img, y, x, cand_y, cand_x, r, dist[i])
    if d < dist[i]:
        dist[i] = d
        ty[i] = cand_y
        tx[i] = cand_x


@njit(cache=True)
def _sweep(img, cy, cx, ty, tx, dist, index, valid, r, reverse, rand, radius0):
    n = cy.size
    h, w = valid.shape
    step = -1 if reverse else 1
    for k in range(n):
        i = n - 1 - k if reverse else k
        y, x = cy[i], cx[i]
        # propagation from the already-visited horizontal and vertical neighbours
        nx = x - step
        if 0 <= nx < w and index[y, nx] >= 0:
            j = index[y, nx]
            _try(img, i, y, x, ty[j], tx[j] + step, valid, r, ty, tx, dist)
        ny = y - step
        if 0 <= ny < h and index[ny, x] >= 0:
            j = index[ny, x]
            _try(img, i, y, x, ty[j] + step, tx[j], valid, r, ty, tx, dist)
        # random search in shrinking windows around the current match
        radius = radius0
        t = 0
        while radius >= 1.0 and t < rand.shape[1]:
            oy = int(np.floor(radius * rand[i, t, 0] + 0.5))
            ox = int(np.floor(radius * rand[i, t, 1] + 0.5))
            _try(img, i, y, x, ty[i] + oy, tx[i] + ox, valid, r, ty, tx, dist)
            radius *= 0.5
            t += 1


@njit(cache=True)
def _exhaustive(img, cy, cx, vy, vx, r, ty, tx, dist):
    for i in range(cy.size):
        for j in range(vy.size):
            if vy[j] == ty[i] and vx[j] == tx[i]:
                continue
            d = _patch_l1(img, cy[i], cx[i], vy[j], vx[j], r, dist[i])
            if d < dist[i]:
                dist[i] = d
                ty[i] = vy[j]
                tx[i] = vx[j]


# --------------------------------------------------------------------------- geometry

def patch_sets(hole: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(centers, valid)`` masks.

    ``centers`` marks in-domain patch centers whose patch touches the hole,
    ``valid`` marks in-domain centers whose patch is entirely known.
    """
    h, w = hole.shape
    side = 2 * radius + 1
    inner = np.zeros_like(hole)
    inner[radius:h - radius, radius:w - radius] = True
    touches = ndimage.maximum_filter(hole.astype(np.uint8), size=side, mode="constant") > 0
    return touches & inner, ~touches & inner


def _center_index(centers: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cy, cx = np.nonzero(centers)
    index = np.full(centers.shape, -1, dtype=np.int64)
    index[cy, cx] = np.arange(cy.size)
    return cy.astype(np.int64), cx.astype(np.int64), index


def init_correspondence(img: np.ndarray, hole: np.ndarray, radius: int,
                        rng: np.random.Generator) -> CorrespondenceMap:
    """Random initial map onto fully known patches."""
    centers, valid = patch_sets(hole, radius)
    vy, vx = np.nonzero(valid)
    if vy.size == 0:
        raise HoleTooLarge("no fully known patch left to copy from")
    cy, cx, _ = _center_index(centers)
    pick = rng.integers(0, vy.size, size=cy.size)
    ty, tx = vy[pick].astype(np.int64), vx[pick].astype(np.int64)
    img = np.ascontiguousarray(img, dtype=np.float64)
    return CorrespondenceMap(cy, cx, ty, tx, _distances(img, cy, cx, ty, tx, radius), valid, radius)


def nn_search(img: np.ndarray, phi: CorrespondenceMap, rng: np.random.Generator | None = None,
              exhaustive: bool | None = None, sweeps: int = 2) -> CorrespondenceMap:
    """Improve ``phi`` for the current image; no patch distance ever increases.

    Distances are first re-evaluated on ``img``. An exhaustive scan is used
    when there are fewer than ``EXHAUSTIVE_LIMIT`` candidate patches (or when
    ``exhaustive`` forces it), otherwise alternating PatchMatch sweeps.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    out = phi.copy()
    r = phi.radius
    out.dist = _distances(img, out.cy, out.cx, out.ty, out.tx, r)
    vy, vx = np.nonzero(phi.valid)
    if exhaustive is None:
        exhaustive = vy.size < EXHAUSTIVE_LIMIT
    if exhaustive:
        _exhaustive(img, out.cy, out.cx, vy.astype(np.int64), vx.astype(np.int64), r,
                    out.ty, out.tx, out.dist)
        return out
    rng = rng if rng is not None else np.random.default_rng(0)
    index = np.full(phi.valid.shape, -1, dtype=np.int64)
    index[out.cy, out.cx] = np.arange(out.cy.size)
    radius0 = float(max(img.shape[:2]))
    trials = int(math.ceil(math.log2(radius0))) + 1
    for s in range(sweeps):
        rand = rng.uniform(-1.0, 1.0, size=(out.cy.size, trials, 2))
        _sweep(img, out.cy, out.cx, out.ty, out.tx, out.dist, index, phi.valid, r,
               s % 2 == 1, rand, radius0)
    return out


def image_update_median(img: np.ndarray, phi: CorrespondenceMap, hole: np.ndarray) -> np.ndarray:
    """Set every hole pixel to the per-channel median of the values its covering patches propose.

    An even number of proposals resolves to the midpoint of the two central values.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w, nch = img.shape
    r = phi.radius
    d = np.arange(-r, r + 1)
    oy, ox = np.repeat(d, d.size), np.tile(d, d.size)
    py = phi.cy[:, None] + oy[None, :]
    px = phi.cx[:, None] + ox[None, :]
    inside = hole[py, px]
    target_pix = (py[inside] * w + px[inside])
    src = img[(phi.ty[:, None] + oy)[inside], (phi.tx[:, None] + ox)[inside]]
    out = img.copy()
    if target_pix.size == 0:
        return out
    uniq, counts = np.unique(target_pix, return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    lo, hi = starts + (counts - 1) // 2, starts + counts // 2
    flat = out.reshape(-1, nch)
    for c in range(nch):
        order = np.lexsort((src[:, c], target_pix))
        vals = src[order, c]
        flat[uniq, c] = 0.5 * (vals[lo] + vals[hi])
    return out


def diffusion_fill(img: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Harmonic fill: each hole pixel becomes the mean of its 4-neighbours (converged solution)."""
    img = np.asarray(img, dtype=np.float64).copy()
    h, w = hole.shape
    ys, xs = np.nonzero(hole)
    n = ys.size
    if n == 0:
        return img
    idx = np.full(hole.shape, -1, dtype=np.int64)
    idx[ys, xs] = np.arange(n)
    rows, cols, vals = [], [], []
    rhs = np.zeros((n, img.shape[2]))
    deg = np.zeros(n)
    for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        ny, nx = ys + dy, xs + dx
        ok = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        deg += ok
        nyo, nxo, src = ny[ok], nx[ok], np.nonzero(ok)[0]
        nb = idx[nyo, nxo]
        unknown = nb >= 0
        rows.append(src[unknown])
        cols.append(nb[unknown])
        vals.append(-np.ones(unknown.sum()))
        np.add.at(rhs, src[~unknown], img[nyo[~unknown], nxo[~unknown]])
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(deg)
    A = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
    sol = spsolve(A.tocsc(), rhs)
    img[ys, xs] = sol.reshape(n, -1)
    return img


# --------------------------------------------------------------------------- pyramid

def _downsample(img: np.ndarray, hole: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = hole.shape
    ph, pw = h + h % 2, w + w % 2
    img = np.pad(img, ((0, ph - h), (0, pw - w), (0, 0)), mode="edge")
    hole = np.pad(hole, ((0, ph - h), (0, pw - w)), mode="edge")
    small = img.reshape(ph // 2, 2, pw // 2, 2, -1).mean(axis=(1, 3))
    small_hole = hole.reshape(ph // 2, 2, pw // 2, 2).any(axis=(1, 3))
    return small, small_hole


def hole_diameter(hole: np.ndarray) -> int:
    labels, n = ndimage.label(hole, structure=EIGHT)
    if n == 0:
        return 0
    return max(max(s[0].stop - s[0].start, s[1].stop - s[1].start)
               for s in ndimage.find_objects(labels))


def default_levels(hole: np.ndarray) -> int:
    d = hole_diameter(hole)
    if d <= 0:
        return 1
    return max(1, math.floor(math.log2(d / 8.0))) + 1


def _upsample_phi(coarse: CorrespondenceMap, fine_img: np.ndarray, fine_hole: np.ndarray,
                  radius: int, rng: np.random.Generator) -> CorrespondenceMap:
    fine = init_correspondence(fine_img, fine_hole, radius, rng)
    ch, cw = coarse.valid.shape
    # offsets of the nearest coarse center for every coarse pixel
    has = np.zeros((ch, cw), dtype=bool)
    has[coarse.cy, coarse.cx] = True
    off_y = np.zeros((ch, cw), dtype=np.int64)
    off_x = np.zeros((ch, cw), dtype=np.int64)
    off_y[coarse.cy, coarse.cx] = coarse.ty - coarse.cy
    off_x[coarse.cy, coarse.cx] = coarse.tx - coarse.cx
    _, (iy, ix) = ndimage.distance_transform_edt(~has, return_indices=True)
    qy = np.minimum(fine.cy // 2, ch - 1)
    qx = np.minimum(fine.cx // 2, cw - 1)
    sy, sx = iy[qy, qx], ix[qy, qx]
    ty = fine.cy + 2 * off_y[sy, sx]
    tx = fine.cx + 2 * off_x[sy, sx]
    h, w = fine_hole.shape
    ok = (ty >= 0) & (ty < h) & (tx >= 0) & (tx < w)
    ok[ok] = fine.valid[ty[ok], tx[ok]]
    fine.ty = np.where(ok, ty, fine.ty)
    fine.tx = np.where(ok, tx, fine.tx)
    fine.dist = _distances(np.ascontiguousarray(fine_img, dtype=np.float64),
                           fine.cy, fine.cx, fine.ty, fine.tx, radius)
    return fine


def _usable_levels(img: np.ndarray, hole: np.ndarray, wanted: int, radius: int) -> int:
    levels = 1
    cur_img, cur_hole = img, hole
    while levels < wanted:
        nxt_img, nxt_hole = _downsample(cur_img, cur_hole)
        if min(nxt_hole.shape) < 2 * (2 * radius + 1) or not patch_sets(nxt_hole, radius)[1].any():
            break
        cur_img, cur_hole = nxt_img, nxt_hole
        levels += 1
    return levels


def solve(problem: InpaintProblem) -> InpaintResult:
    """Run the full coarse-to-fine reconstruction and keep the finest-level energy trace."""
    hole = problem.hole
    if hole.mean() > MAX_HOLE_FRACTION:
        raise HoleTooLarge(f"hole covers {hole.mean():.0%} of the image")
    rng = np.random.default_rng(problem.seed)
    radius = problem.patch_side // 2
    base = problem.image.astype(np.float64)
    if not hole.any():
        empty = CorrespondenceMap(*(np.zeros(0, dtype=np.int64) for _ in range(4)),
                                  np.zeros(0), patch_sets(hole, radius)[1], radius)
        return InpaintResult(problem.image.copy(), empty, 1)

    wanted = problem.levels if problem.levels is not None else default_levels(hole)
    levels = _usable_levels(base, hole, max(1, wanted), radius)
    pyramid = [(base, hole)]
    for _ in range(levels - 1):
        pyramid.append(_downsample(*pyramid[-1]))

    history: list[float] = []
    phi = None
    cur = None
    for lvl in range(levels - 1, -1, -1):
        img_l, hole_l = pyramid[lvl]
        if phi is None:
            cur = diffusion_fill(img_l, hole_l)
            phi = init_correspondence(cur, hole_l, radius, rng)
        else:
            cur = img_l.copy()
            phi = _upsample_phi(phi, cur, hole_l, radius, rng)
            cur = image_update_median(cur, phi, hole_l)
        for _ in range(problem.iterations):
            phi = nn_search(cur, phi, rng)
            if lvl == 0:
                history.append(phi.energy)
            cur = image_update_median(cur, phi, hole_l)
            if lvl == 0:
                history.append(float(_distances(cur, phi.cy, phi.cx, phi.ty, phi.tx, radius).sum()))

    out = problem.image.copy()
    out[hole] = np.clip(np.rint(cur[hole]), 0, 255).astype(np.uint8)
    return InpaintResult(out, phi, levels, history)


def inpaint(problem: InpaintProblem) -> np.ndarray:
    """Fill ``problem.hole``; pixels outside the hole are returned unchanged."""
    return solve(problem).image
