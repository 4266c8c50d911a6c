"""Seeded synthetic neuron fixtures: tree morphologies plus rasterized
binary masks and noisy probability volumes.

Randomness comes from numpy's PCG64 with documented stream tags so the
same spec reproduces the same fixture everywhere: stream 1 drives tree
growth, stream 2 drives the probability-volume noise. Morphology
coordinates live in voxel index space, (x, y, z) mapping to voxel
(z, y, x); the whole tree stays inside the volume with a margin of at
least the tube radius.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import GenerationError, ValidationError
from .swc import Morphology, SwcRecord
from .volume import BINARY, PROBABILITY, Volume3D

STREAM_TREE = 1
STREAM_NOISE = 2

_MAX_DIRECTION_TRIES = 64


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    dims: tuple = (32, 32, 32)
    n_branch_points: int = 2
    segment_length: tuple = (4.0, 7.0)
    tube_radius: float = 1.5
    noise_sigma: float = 0.0
    blur_sigma: float = 0.0

    def __post_init__(self):
        d = tuple(int(v) for v in self.dims)
        if len(d) != 3 or min(d) < 1:
            raise ValidationError(f"dims must be 3 positive integers, got {self.dims!r}")
        lo, hi = (float(self.segment_length[0]), float(self.segment_length[1]))
        if not (0 < lo <= hi):
            raise ValidationError(f"segment_length must satisfy 0 < min <= max, got {self.segment_length!r}")
        if self.n_branch_points < 0:
            raise ValidationError("n_branch_points must be >= 0")
        if self.tube_radius <= 0:
            raise ValidationError("tube_radius must be positive")
        if self.noise_sigma < 0 or self.blur_sigma < 0:
            raise ValidationError("noise_sigma and blur_sigma must be non-negative")
        object.__setattr__(self, "dims", d)
        object.__setattr__(self, "segment_length", (lo, hi))


def _rng(seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def _unit_sphere(rng):
    v = rng.normal(size=3)
    n = float(np.sqrt((v ** 2).sum()))
    while n < 1e-12:
        v = rng.normal(size=3)
        n = float(np.sqrt((v ** 2).sum()))
    return v / n


def _cap_direction(rng, axis, cos_min):
    """Uniform direction on the spherical cap {u : dot(u, axis) >= cos_min}."""
    z = rng.uniform(cos_min, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    s = np.sqrt(max(0.0, 1.0 - z * z))
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.sqrt((u ** 2).sum())
    v = np.cross(axis, u)
    return s * np.cos(phi) * u + s * np.sin(phi) * v + z * axis


def generate_tree(spec: SynthSpec) -> Morphology:
    """Grow a branching path tree inside the volume, deterministically."""
    rng = _rng(spec.seed, STREAM_TREE)
    d, h, w = spec.dims
    margin = spec.tube_radius + 1.0
    lo = np.array([margin, margin, margin])
    hi = np.array([w - 1 - margin, h - 1 - margin, d - 1 - margin])  # (x, y, z)
    if (hi - lo).min() <= 0:
        raise GenerationError(
            f"dims {spec.dims} leave no interior for margin {margin:.2f}")

    positions = {}
    directions = {}
    children = {}
    records = []

    def add_node(pos, direction, parent_id, type_code):
        node_id = len(records) + 1
        records.append(SwcRecord(node_id, type_code, float(pos[0]), float(pos[1]),
                                 float(pos[2]), spec.tube_radius, parent_id))
        positions[node_id] = np.asarray(pos, dtype=np.float64)
        directions[node_id] = direction
        children[node_id] = []
        if parent_id != -1:
            children[parent_id].append(node_id)
        return node_id

    def grow_path(start_id, direction, n_segments, type_code):
        current = start_id
        for _ in range(n_segments):
            pos = positions[current]
            step = rng.uniform(*spec.segment_length)
            d_try = direction
            placed = False
            for attempt in range(_MAX_DIRECTION_TRIES):
                nxt = pos + step * d_try
                if (nxt >= lo).all() and (nxt <= hi).all():
                    placed = True
                    break
                if attempt < _MAX_DIRECTION_TRIES // 2:
                    d_try = _cap_direction(rng, direction, 0.7)
                else:
                    center = 0.5 * (lo + hi)
                    inward = center - pos
                    inward /= max(1e-12, float(np.sqrt((inward ** 2).sum())))
                    d_try = _cap_direction(rng, inward, 0.8)
            if not placed:
                raise GenerationError(
                    f"could not keep the tree inside dims {spec.dims}; "
                    "enlarge dims or shorten segments")
            current = add_node(nxt, d_try, current, type_code)
            direction = _cap_direction(rng, d_try, 0.9)
        return current

    root_pos = lo + rng.uniform(size=3) * (hi - lo)
    root_dir = _unit_sphere(rng)
    root_id = add_node(root_pos, root_dir, -1, type_code=1)
    grow_path(root_id, root_dir, int(rng.integers(4, 7)), type_code=3)

    for _ in range(spec.n_branch_points):
        interior = sorted(nid for nid, kids in children.items() if kids)
        attach = int(rng.choice(interior))
        branch_dir = _cap_direction(rng, directions[attach], 0.2)
        grow_path(attach, branch_dir, int(rng.integers(2, 5)), type_code=3)

    return Morphology(tuple(records))


def _stamp_capsule(mask, pa, pb, radius):
    d, h, w = mask.shape
    lo = np.floor(np.minimum(pa, pb) - radius).astype(int)
    hi = np.ceil(np.maximum(pa, pb) + radius).astype(int)
    x0, y0, z0 = np.maximum(lo, 0)
    x1 = min(hi[0], w - 1)
    y1 = min(hi[1], h - 1)
    z1 = min(hi[2], d - 1)
    if x0 > x1 or y0 > y1 or z0 > z1:
        return
    zz, yy, xx = np.meshgrid(np.arange(z0, z1 + 1), np.arange(y0, y1 + 1),
                             np.arange(x0, x1 + 1), indexing="ij")
    pts = np.stack((xx, yy, zz), axis=-1).astype(np.float64)
    seg = pb - pa
    seg_len2 = float((seg ** 2).sum())
    if seg_len2 < 1e-24:
        d2 = ((pts - pa) ** 2).sum(axis=-1)
    else:
        t = np.clip(((pts - pa) @ seg) / seg_len2, 0.0, 1.0)
        closest = pa + t[..., None] * seg
        d2 = ((pts - closest) ** 2).sum(axis=-1)
    mask[z0:z1 + 1, y0:y1 + 1, x0:x1 + 1] |= d2 <= radius * radius


def rasterize(m: Morphology, spec: SynthSpec):
    """Render the morphology: a binary tube mask (swept balls along each
    segment, every node voxel guaranteed foreground) and a probability
    volume (mask blurred with blur_sigma, plus clamped Gaussian noise
    drawn from the spec's noise stream)."""
    d, h, w = spec.dims
    bounds = np.array([w, h, d], dtype=np.float64) - 1
    mask = np.zeros(spec.dims, dtype=bool)
    positions = m.node_positions()
    if len(positions):
        if (positions < 0).any() or (positions > bounds).any():
            raise ValidationError("morphology does not fit inside the volume dims")
    for parent, child in m.segments():
        _stamp_capsule(mask, np.array(parent.position()), np.array(child.position()),
                       spec.tube_radius)
    for pos in positions:
        ix, iy, iz = (int(v) for v in np.rint(pos))
        mask[iz, iy, ix] = True

    vol_mask = Volume3D(mask.astype("u1"), BINARY)
    if spec.blur_sigma == 0 and spec.noise_sigma == 0:
        prob = mask.astype("<f4")
    else:
        field = mask.astype(np.float64)
        if spec.blur_sigma > 0:
            field = gaussian_filter(field, sigma=spec.blur_sigma, mode="constant", cval=0.0)
        if spec.noise_sigma > 0:
            noise_rng = _rng(spec.seed, STREAM_NOISE)
            field = field + noise_rng.normal(0.0, spec.noise_sigma, size=spec.dims)
        prob = np.clip(field, 0.0, 1.0).astype("<f4")
    return vol_mask, Volume3D(prob, PROBABILITY)
