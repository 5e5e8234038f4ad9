"""Geometry of the structured stabilizing set.

A ComponentAtlas is a labeled grid over the free gain entries: every
cell whose center is stabilizing gets a component id, face-adjacent
stable cells share ids, and ids are renumbered 1..k by descending cell
count so labelings are deterministic. Component counts from the grid are
lower bounds on the true component count restricted to the box (cells
can merge across a thin unstable sliver only by becoming unstable at the
sampled center, never the reverse).

Also here: rejection sampling of stabilizing structured gains, the
operational jump detector used by the batch experiments, and the
Fibonacci lower-bound probe for the chain family.
"""

import base64
import hashlib
import json
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from ._backend import kernels
from .errors import (
    InvalidParameterError,
    OutOfAtlasError,
    SamplingError,
    UnsupportedDimensionError,
)
from .lyap import DEFAULT_TOLERANCES
from .model import StructureMask, build_chain_system, default_chain_params

__all__ = [
    "ComponentAtlas",
    "normalize_box",
    "build_atlas",
    "classify",
    "sample_stabilizing",
    "trajectory_labels",
    "count_jumps",
    "atlas_to_json_dict",
    "atlas_from_json_dict",
    "save_atlas",
    "load_atlas",
    "atlas_slice",
    "fibonacci",
    "fibonacci_bound_probe",
    "MAX_ATLAS_DIMS",
]

MAX_ATLAS_DIMS = 5
_MAX_CELLS = 200_000_000  # memory guard, ~800 MB of labels
BOUNDARY_LABEL = 0  # sentinel for "boundary/unknown"


def normalize_box(box, d, positive_volume=False):
    """Box as a (d, 2) array from either (lo, hi) or per-axis rows.

    Degenerate (width 0) axes are allowed for sampling targets; pass
    positive_volume=True where cells must have volume (grids).
    """
    b = np.asarray(box, dtype=np.float64)
    if b.shape == (2,):
        b = np.tile(b, (d, 1))
    if b.shape != (d, 2):
        raise InvalidParameterError(f"box must be (lo, hi) or shape ({d}, 2), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise InvalidParameterError("box bounds must be finite")
    if not np.all(b[:, 0] <= b[:, 1]):
        raise InvalidParameterError("box must have lo <= hi per axis")
    if positive_volume and not np.all(b[:, 0] < b[:, 1]):
        raise InvalidParameterError("box must have positive volume (lo < hi per axis)")
    return b


@dataclass
class ComponentAtlas:
    """Labeled stability grid over the free entries of the gain."""

    box: np.ndarray  # (d, 2)
    resolution: int
    labels: np.ndarray  # uint32, shape (resolution,) * d
    component_count: int
    free_rows: np.ndarray
    free_cols: np.ndarray
    gain_shape: tuple
    system_hash: str
    margin: float = DEFAULT_TOLERANCES.stability_margin
    system: Optional[object] = field(default=None, repr=False, compare=False)
    _neighbor_offsets: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def ndim(self):
        return self.box.shape[0]

    @property
    def cell_widths(self):
        return (self.box[:, 1] - self.box[:, 0]) / self.resolution

    @property
    def cell_volume(self):
        return float(np.prod(self.cell_widths))

    @property
    def cell_diagonal(self):
        return float(np.linalg.norm(self.cell_widths))

    def component_cell_counts(self):
        """Cells per component, index i holding component i+1."""
        counts = np.bincount(self.labels.ravel(), minlength=self.component_count + 1)
        return counts[1 : self.component_count + 1]

    def free_values(self, K):
        K = np.asarray(K, dtype=np.float64)
        if K.shape != self.gain_shape:
            raise InvalidParameterError(
                f"gain must have shape {self.gain_shape}, got {K.shape}")
        return K[self.free_rows, self.free_cols]

    def cell_index(self, x):
        """Grid cell containing the free-entry vector x."""
        x = np.asarray(x, dtype=np.float64)
        lo, hi = self.box[:, 0], self.box[:, 1]
        if np.any(x < lo) or np.any(x > hi):
            raise OutOfAtlasError(f"point {x.tolist()} lies outside the atlas box")
        idx = np.floor((x - lo) / self.cell_widths).astype(np.intp)
        return np.minimum(idx, self.resolution - 1)

    def neighbor_offsets(self, radius=2):
        """Integer offsets within Chebyshev radius, nearest-first.

        Sorted by Euclidean length then lexicographically, so nearest-cell
        fallback lookups are deterministic.
        """
        if self._neighbor_offsets is None:
            rng = np.arange(-radius, radius + 1)
            grids = np.meshgrid(*([rng] * self.ndim), indexing="ij")
            offs = np.stack([g.ravel() for g in grids], axis=1)
            offs = offs[np.any(offs != 0, axis=1)]
            order = np.lexsort(tuple(offs[:, k] for k in range(self.ndim - 1, -1, -1))
                               + (np.linalg.norm(offs, axis=1),))
            self._neighbor_offsets = offs[order]
        return self._neighbor_offsets


def _system_fingerprint(sys, mask, box, resolution, margin):
    h = hashlib.sha256()
    for M in (sys.A, sys.B, sys.C, mask.pattern, box):
        h.update(np.ascontiguousarray(M, dtype=np.float64).tobytes())
        h.update(b"|")
    h.update(f"res={int(resolution)};margin={float(margin):.17g}".encode())
    return h.hexdigest()[:16]


def build_atlas(sys, mask, box, resolution, margin=None, chunk=262144):
    """Stability-classify every cell center and label connected components.

    Face-adjacent stable cells are merged; labels are 1..component_count
    in decreasing cell-count order. Guarded to at most 5 free dimensions.
    """
    if margin is None:
        margin = DEFAULT_TOLERANCES.stability_margin
    d = mask.n_free
    if d < 1:
        raise InvalidParameterError("mask has no free entries")
    if d > MAX_ATLAS_DIMS:
        raise UnsupportedDimensionError(
            f"atlas supports at most {MAX_ATLAS_DIMS} free entries, mask has {d}")
    resolution = int(resolution)
    if resolution < 1:
        raise InvalidParameterError(f"resolution must be >= 1, got {resolution}")
    if resolution**d > _MAX_CELLS:
        raise InvalidParameterError(
            f"grid of {resolution}^{d} cells exceeds the {_MAX_CELLS} cell guard")
    box = normalize_box(box, d, positive_volume=True)
    rows, cols = mask.free_indices()

    axes = [box[k, 0] + (np.arange(resolution) + 0.5) * (box[k, 1] - box[k, 0]) / resolution
            for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)

    N = points.shape[0]
    absc = np.empty(N)
    for lo_i in range(0, N, chunk):
        hi_i = min(lo_i + chunk, N)
        absc[lo_i:hi_i] = kernels.closed_loop_abscissa_grid(
            sys.A, sys.B, sys.C, rows, cols, points[lo_i:hi_i])
    stable = (absc < -margin).reshape((resolution,) * d)

    raw, n_comp = ndimage.label(stable)  # face adjacency (cross structuring element)
    labels = np.zeros(raw.shape, dtype=np.uint32)
    if n_comp:
        counts = np.bincount(raw.ravel())[1:]
        order = np.argsort(-counts, kind="stable")  # ties keep scan order
        remap = np.zeros(n_comp + 1, dtype=np.uint32)
        remap[order + 1] = np.arange(1, n_comp + 1, dtype=np.uint32)
        labels = remap[raw]

    return ComponentAtlas(
        box=box,
        resolution=resolution,
        labels=labels,
        component_count=int(n_comp),
        free_rows=rows,
        free_cols=cols,
        gain_shape=(mask.m, mask.p),
        system_hash=_system_fingerprint(sys, mask, box, resolution, margin),
        margin=margin,
        system=sys,
    )


def _point_abscissa(atlas, sys, x):
    a = kernels.closed_loop_abscissa_grid(
        sys.A, sys.B, sys.C, atlas.free_rows, atlas.free_cols, x[None, :])
    return float(a[0])


def classify(atlas, K, sys=None):
    """Component id of the cell containing K's free entries.

    Falls back to the nearest labeled cell within 2 cells when the cell
    itself is unlabeled but K is stabilizing; returns 0
    (boundary/unknown) otherwise. Raises OutOfAtlasError when K leaves
    the box.
    """
    if sys is None:
        sys = atlas.system
    x = atlas.free_values(K)
    idx = atlas.cell_index(x)
    label = int(atlas.labels[tuple(idx)])
    if label != BOUNDARY_LABEL:
        return label
    if sys is not None and not (_point_abscissa(atlas, sys, x) < -atlas.margin):
        return BOUNDARY_LABEL
    res = atlas.resolution
    for off in atlas.neighbor_offsets(radius=2):
        j = idx + off
        if np.any(j < 0) or np.any(j >= res):
            continue
        lab = int(atlas.labels[tuple(j)])
        if lab != BOUNDARY_LABEL:
            return lab
    return BOUNDARY_LABEL


def philox_rng(seed, spawn_key=()):
    """Counter-based Generator from a root seed and a spawn-key path.

    The same (seed, spawn_key) pair always yields the same stream, no
    matter how many other streams were created before it, which keeps
    parallel runs reproducible.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(entropy=int(seed),
                                    spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def sample_stabilizing(sys, mask, box, seed, max_rejects=100000, margin=None,
                       block=64):
    """Uniform rejection sampling of a structured stabilizing gain.

    `seed` may be an integer, a SeedSequence, or a Generator. Draws are
    made in fixed-size blocks so results depend only on the seed.
    """
    if margin is None:
        margin = DEFAULT_TOLERANCES.stability_margin
    d = mask.n_free
    box = normalize_box(box, d)
    rows, cols = mask.free_indices()
    rng = seed if isinstance(seed, np.random.Generator) else philox_rng(seed)
    attempts = 0
    while attempts < max_rejects:
        nb = min(block, max_rejects - attempts)
        pts = rng.uniform(box[:, 0], box[:, 1], size=(nb, d))
        absc = kernels.closed_loop_abscissa_grid(sys.A, sys.B, sys.C, rows, cols, pts)
        hits = np.flatnonzero(absc < -margin)
        if hits.size:
            K = np.zeros((mask.m, mask.p))
            K[rows, cols] = pts[hits[0]]
            return K
        attempts += nb
    raise SamplingError(attempts=max_rejects, accepted=0)


def trajectory_labels(atlas, gains, sys=None, out_of_box=BOUNDARY_LABEL):
    """Component label per gain; out-of-box points get `out_of_box`."""
    labels = []
    for K in gains:
        try:
            labels.append(classify(atlas, K, sys=sys))
        except OutOfAtlasError:
            labels.append(out_of_box)
    return labels


def count_jumps(atlas, gains, sys=None, labels=None, n_segment=10):
    """Number of component jumps along a trajectory of gains.

    A step is a jump when its endpoints carry different atlas labels, or
    carry the same label but the straight segment between them contains
    an unstable point among n_segment interior samples (the step left the
    component and returned).
    """
    gains = [np.asarray(K, dtype=np.float64) for K in gains]
    if labels is None:
        labels = trajectory_labels(atlas, gains, sys=sys)
    if sys is None:
        sys = atlas.system
    if len(gains) < 2:
        return 0, labels
    jumps = 0
    need_segment = []
    for i in range(len(gains) - 1):
        if labels[i] != labels[i + 1]:
            jumps += 1
        else:
            need_segment.append(i)
    if need_segment and sys is not None:
        ts = (np.arange(n_segment) + 1.0) / (n_segment + 1.0)
        xs = np.array([atlas.free_values(K) for K in gains])
        seg_pts = []
        for i in need_segment:
            seg_pts.append(xs[i] + np.outer(ts, xs[i + 1] - xs[i]))
        pts = np.concatenate(seg_pts, axis=0)
        absc = kernels.closed_loop_abscissa_grid(
            sys.A, sys.B, sys.C, atlas.free_rows, atlas.free_cols, pts)
        unstable = (absc >= -atlas.margin).reshape(len(need_segment), n_segment)
        jumps += int(np.any(unstable, axis=1).sum())
    return jumps, labels


def _rle_encode(flat):
    """Run-length encode a uint32 array as (value, run) little-endian pairs."""
    flat = np.asarray(flat, dtype=np.uint32)
    if flat.size == 0:
        return b""
    change = np.flatnonzero(flat[1:] != flat[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [flat.size]))
    vals = flat[starts]
    runs = (ends - starts).astype(np.uint32)
    out = np.empty(2 * vals.size, dtype="<u4")
    out[0::2] = vals
    out[1::2] = runs
    return out.tobytes()


def _rle_decode(buf, size):
    pairs = np.frombuffer(buf, dtype="<u4")
    if pairs.size % 2:
        raise InvalidParameterError("corrupt RLE label stream")
    vals = pairs[0::2].astype(np.uint32)
    runs = pairs[1::2].astype(np.int64)
    if runs.sum() != size:
        raise InvalidParameterError("RLE label stream length mismatch")
    return np.repeat(vals, runs)


def atlas_to_json_dict(atlas):
    payload = zlib.compress(_rle_encode(atlas.labels.ravel()), 6)
    return {
        "format": "dlqr-atlas-1",
        "box": atlas.box.tolist(),
        "resolution": atlas.resolution,
        "component_count": atlas.component_count,
        "free_entries": [[int(r), int(c)] for r, c in zip(atlas.free_rows, atlas.free_cols)],
        "gain_shape": list(atlas.gain_shape),
        "margin": atlas.margin,
        "system_hash": atlas.system_hash,
        "labels_rle": base64.b64encode(payload).decode("ascii"),
    }


def atlas_from_json_dict(doc, system=None):
    if doc.get("format") != "dlqr-atlas-1":
        raise InvalidParameterError(f"unknown atlas format {doc.get('format')!r}")
    box = np.asarray(doc["box"], dtype=np.float64)
    resolution = int(doc["resolution"])
    d = box.shape[0]
    raw = zlib.decompress(base64.b64decode(doc["labels_rle"]))
    labels = _rle_decode(raw, resolution**d).reshape((resolution,) * d)
    free = np.asarray(doc["free_entries"], dtype=np.intp)
    return ComponentAtlas(
        box=box,
        resolution=resolution,
        labels=labels,
        component_count=int(doc["component_count"]),
        free_rows=free[:, 0],
        free_cols=free[:, 1],
        gain_shape=tuple(doc["gain_shape"]),
        system_hash=doc["system_hash"],
        margin=float(doc.get("margin", DEFAULT_TOLERANCES.stability_margin)),
        system=system,
    )


def save_atlas(atlas, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(atlas_to_json_dict(atlas), fh)


def load_atlas(path, system=None):
    with open(path, "r", encoding="utf-8") as fh:
        return atlas_from_json_dict(json.load(fh), system=system)


def atlas_slice(atlas, keep_axes, fixed_values):
    """2-D slab of labels for plotting.

    keep_axes are the two free-entry axes to keep; fixed_values maps each
    remaining axis to a coordinate, snapped to its cell.
    """
    keep_axes = tuple(int(a) for a in keep_axes)
    if len(keep_axes) != 2:
        raise InvalidParameterError("keep_axes must name exactly two axes")
    d = atlas.ndim
    indexer = []
    for ax in range(d):
        if ax in keep_axes:
            indexer.append(slice(None))
            continue
        if ax not in fixed_values:
            raise InvalidParameterError(f"axis {ax} needs a fixed value")
        v = float(fixed_values[ax])
        lo, hi = atlas.box[ax]
        if not (lo <= v <= hi):
            raise OutOfAtlasError(f"fixed value {v} outside box on axis {ax}")
        i = min(int((v - lo) / atlas.cell_widths[ax]), atlas.resolution - 1)
        indexer.append(i)
    slab = atlas.labels[tuple(indexer)]
    if keep_axes[0] > keep_axes[1]:
        slab = slab.T
    def centers(k):
        return atlas.box[k, 0] + (np.arange(atlas.resolution) + 0.5) * atlas.cell_widths[k]
    return centers(keep_axes[0]), centers(keep_axes[1]), slab


def fibonacci(n):
    """F_0 = F_1 = 1, F_{i+2} = F_{i+1} + F_i."""
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def fibonacci_bound_probe(n, eps, box=(-60.0, 60.0), resolution=40):
    """Check component_count >= F_n on the order-n chain family.

    Guarded to n <= 5 (the grid is exponential in n).
    """
    if n > 5:
        raise UnsupportedDimensionError(f"probe guarded to n <= 5, got {n}")
    sys = build_chain_system(default_chain_params(n, eps=eps))
    mask = StructureMask.identity(n)
    atlas = build_atlas(sys, mask, box, resolution)
    target = fibonacci(n)
    return atlas.component_count, bool(atlas.component_count >= target)
