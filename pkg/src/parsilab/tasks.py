"""Instance builders: synthetic lattices, random r-HSTs, stereo matching
and inpainting models, plus PGM/PPM raster I/O."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .hst import RHst
from .model import (Clique, DiameterMetricSpec, EnergyModel, InvalidInputError,
                    LabelMetric)


# ---------------------------------------------------------------------------
# synthetic lattices
# ---------------------------------------------------------------------------

@dataclass
class GridSpec:
    width: int = 100
    height: int = 100
    num_labels: int = 20
    window: int = 10
    stride: int = 1
    unary_low: float = 0.0
    unary_high: float = 100.0
    clique_weight: float = 1.0
    seed: int = 0
    # potential: truncated linear metric by default, or a caller-given tree
    lam: float = 1.0
    truncation: int = 5
    tree: RHst = None

    def validate(self):
        if self.window > min(self.width, self.height):
            raise InvalidInputError("clique window does not fit in the grid")
        if self.stride < 1:
            raise InvalidInputError("stride must be at least one")
        if not np.isfinite([self.unary_low, self.unary_high]).all():
            raise InvalidInputError("unary bounds must be finite")


def window_cliques(width, height, window, stride, weight):
    cliques = []
    for y0 in range(0, height - window + 1, stride):
        for x0 in range(0, width - window + 1, stride):
            members = [(y0 + dy) * width + (x0 + dx)
                       for dy in range(window) for dx in range(window)]
            cliques.append(Clique(members, weight))
    return cliques


def generate_synthetic(spec):
    """Random lattice instance: uniform unaries, sliding-window cliques,
    diameter diversity over a truncated linear metric (or a given tree)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.width * spec.height
    unaries = rng.uniform(spec.unary_low, spec.unary_high, size=(n, spec.num_labels))
    cliques = window_cliques(spec.width, spec.height, spec.window, spec.stride,
                             spec.clique_weight)
    if spec.tree is not None:
        if spec.tree.num_labels != spec.num_labels:
            raise InvalidInputError("tree labels do not match the grid spec")
        metric = spec.tree.metric()
    else:
        metric = LabelMetric.truncated_linear(spec.num_labels, spec.lam,
                                              spec.truncation)
    return EnergyModel(unaries, cliques, DiameterMetricSpec(metric))


def random_rhst(label_count, r=2.0, depth=3, seed=0):
    """A random r-HST with the given label set as leaves.

    Labels are recursively partitioned; every chain of edge lengths
    shrinks by a factor of at least r, and all invariants are checked
    before returning.
    """
    if r <= 1:
        raise InvalidInputError("separation parameter r must exceed 1")
    if depth < 1 or (label_count > 1 and depth < 2):
        raise InvalidInputError("tree too shallow for this many labels")
    rng = np.random.default_rng(seed)
    parents = [-1]
    child_edge = [0.0]
    leaf_label = [None]

    def grow(node, labels, edge, levels_left):
        if len(labels) == 1:
            child_edge[node] = 0.0
            leaf_label[node] = int(labels[0])
            return
        child_edge[node] = edge
        if levels_left <= 2:
            parts = [[l] for l in labels]     # forced full split at the bottom
        else:
            count = int(rng.integers(2, len(labels) + 1))
            assign = rng.integers(0, count, size=len(labels))
            assign[rng.permutation(len(labels))[:count]] = np.arange(count)
            parts = [[l for l, a in zip(labels, assign) if a == g]
                     for g in range(count)]
            parts = [p for p in parts if p]
        child_len = edge / (r * float(rng.uniform(1.0, 1.5)))
        for part in parts:
            child = len(parents)
            parents.append(node)
            child_edge.append(0.0)
            leaf_label.append(None)
            grow(child, part, child_len, levels_left - 1)

    top_edge = float(rng.uniform(4.0, 16.0))
    grow(0, list(range(label_count)), top_edge, depth)
    return RHst(parents, child_edge, leaf_label, r=r)


# ---------------------------------------------------------------------------
# image tasks
# ---------------------------------------------------------------------------

@dataclass
class ImageTask:
    kind: str                         # "stereo" | "inpaint"
    left: np.ndarray = None           # H x W x 3 (stereo) or H x W (inpaint)
    right: np.ndarray = None
    image: np.ndarray = None
    mask: np.ndarray = None           # True where the pixel is obscured
    superpixels: np.ndarray = None    # int region id per pixel
    num_labels: int = 16
    lam: float = 20.0
    truncation: int = 10
    sigma: float = 100.0
    unary_truncation: float = None
    grad_threshold: float = 8.0
    w_low: float = 1.0
    w_high: float = 2.0
    superpixel_block: int = 8         # fallback partition tile size


def block_partition(height, width, block):
    """Fallback superpixel map: a raster of B x B tiles with dense ids."""
    ys = np.arange(height) // block
    xs = np.arange(width) // block
    per_row = (width + block - 1) // block
    return (ys[:, None] * per_row + xs[None, :]).astype(np.int64)


def _ensure_superpixels(task, height, width):
    if task.superpixels is not None:
        sp = np.asarray(task.superpixels)
        if sp.shape != (height, width):
            raise InvalidInputError("superpixel map size mismatch")
        return sp
    warnings.warn("no superpixel map given; falling back to a block partition")
    return block_partition(height, width, task.superpixel_block)


def superpixel_cliques(region_map, intensity, sigma):
    """One clique per region, weighted by exp(-var(intensity)/sigma^2)."""
    flat_regions = region_map.reshape(-1)
    flat_int = intensity.reshape(-1).astype(float)
    cliques = []
    for rid in np.unique(flat_regions):
        members = np.flatnonzero(flat_regions == rid)
        w = float(np.exp(-flat_int[members].var() / sigma ** 2))
        cliques.append(Clique(members, w))
    return cliques


def pairwise_cliques(height, width, weight_fn):
    cliques = []
    for y in range(height):
        for x in range(width):
            p = y * width + x
            if x + 1 < width:
                cliques.append(Clique((p, p + 1), weight_fn(p, p + 1)))
            if y + 1 < height:
                cliques.append(Clique((p, p + width), weight_fn(p, p + width)))
    return cliques


def _intensity(img):
    img = np.asarray(img, dtype=float)
    return img.mean(axis=2) if img.ndim == 3 else img


def build_stereo(task):
    """Disparity model: L1 RGB matching unaries, gradient-weighted pairwise
    terms, superpixel cliques, truncated-linear diameter potential."""
    left = np.asarray(task.left, dtype=float)
    right = np.asarray(task.right, dtype=float)
    if left.ndim == 2:
        left = left[:, :, None]
        right = right[:, :, None]
    if left.shape != right.shape:
        raise InvalidInputError("stereo images must have the same shape")
    height, width = left.shape[:2]
    n = height * width
    h = task.num_labels

    # right-image column is the left column minus the disparity, edge-clamped
    unaries = np.empty((n, h))
    cols = np.arange(width)
    for d in range(h):
        shifted = right[:, np.clip(cols - d, 0, width - 1), :]
        diff = np.abs(left - shifted).sum(axis=2)
        unaries[:, d] = diff.reshape(-1)
    if task.unary_truncation is not None:
        np.minimum(unaries, task.unary_truncation, out=unaries)

    intensity = _intensity(left)
    flat = intensity.reshape(-1)

    def pair_weight(p, q):
        return task.w_high if abs(flat[p] - flat[q]) < task.grad_threshold \
            else task.w_low

    cliques = pairwise_cliques(height, width, pair_weight)
    cliques += superpixel_cliques(_ensure_superpixels(task, height, width),
                                  intensity, task.sigma)
    metric = LabelMetric.truncated_linear(h, task.lam, task.truncation)
    return EnergyModel(unaries, cliques, DiameterMetricSpec(metric))


def build_inpaint(task):
    """Intensity restoration model: squared-difference unaries on observed
    pixels (zero on obscured ones), unit pairwise weights, superpixel
    cliques, truncated-linear diameter potential."""
    img = np.asarray(task.image)
    if img.ndim != 2:
        raise InvalidInputError("inpainting expects a grayscale image")
    height, width = img.shape
    n = height * width
    h = task.num_labels
    mask = np.zeros((height, width), dtype=bool) if task.mask is None \
        else np.asarray(task.mask, dtype=bool)
    if mask.shape != img.shape:
        raise InvalidInputError("mask size mismatch")

    labels = np.arange(h, dtype=float)
    unaries = (labels[None, :] - img.reshape(-1, 1).astype(float)) ** 2
    unaries[mask.reshape(-1)] = 0.0

    cliques = pairwise_cliques(height, width, lambda p, q: 1.0)
    cliques += superpixel_cliques(_ensure_superpixels(task, height, width),
                                  img.astype(float), task.sigma)
    metric = LabelMetric.truncated_linear(h, task.lam, task.truncation)
    return EnergyModel(unaries, cliques, DiameterMetricSpec(metric))


# ---------------------------------------------------------------------------
# raster I/O: binary PGM (P5) / PPM (P6)
# ---------------------------------------------------------------------------

def _read_header_token(f):
    token = b""
    while True:
        ch = f.read(1)
        if not ch:
            raise InvalidInputError("truncated raster header")
        if ch.isspace():
            if token:
                return token
            continue
        if ch == b"#":                 # comments tolerated on read
            while f.read(1) not in (b"\n", b""):
                pass
            continue
        token += ch


def read_raster(path):
    """Read a binary PGM/PPM; returns a 2-D (gray) or 3-D (RGB) uint array."""
    with open(path, "rb") as f:
        magic = _read_header_token(f)
        if magic not in (b"P5", b"P6"):
            raise InvalidInputError("unsupported raster magic %r" % magic)
        width = int(_read_header_token(f))
        height = int(_read_header_token(f))
        maxval = int(_read_header_token(f))
        channels = 3 if magic == b"P6" else 1
        if maxval < 256:
            data = np.frombuffer(f.read(width * height * channels),
                                 dtype=np.uint8)
        else:
            data = np.frombuffer(f.read(width * height * channels * 2),
                                 dtype=">u2").astype(np.uint16)
        if data.size != width * height * channels:
            raise InvalidInputError("truncated raster data")
    if channels == 3:
        return data.reshape(height, width, 3)
    return data.reshape(height, width)


def write_raster(path, image):
    """Write a binary PGM (2-D input) or PPM (3-D input); no comments."""
    image = np.asarray(image)
    if image.ndim == 2:
        magic, channels = b"P5", 1
    elif image.ndim == 3 and image.shape[2] == 3:
        magic, channels = b"P6", 3
    else:
        raise InvalidInputError("raster must be H x W or H x W x 3")
    maxval = 65535 if image.max(initial=0) > 255 else 255
    dtype = ">u2" if maxval == 65535 else np.uint8
    with open(path, "wb") as f:
        f.write(b"%s\n%d %d\n%d\n" % (magic, image.shape[1], image.shape[0],
                                      maxval))
        f.write(np.ascontiguousarray(image, dtype=dtype).tobytes())


def labeling_to_raster(labeling, height, width, num_labels):
    """Scale label indices into 0..255 for visualization."""
    lab = np.asarray(labeling).reshape(height, width)
    if num_labels <= 1:
        return np.zeros((height, width), dtype=np.uint8)
    return (lab * 255 // (num_labels - 1)).astype(np.uint8)


def write_labeling_text(path, labeling):
    with open(path, "w") as f:
        for l in labeling:
            f.write("%d\n" % int(l))
