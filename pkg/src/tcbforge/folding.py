"""Fold preview: map a flat board mesh into its thermoformed shape.

Each bend wraps a material band of arc length radius*|angle|, centered on
the bend axis, onto a cylinder; material beyond the band moves rigidly.
The map is an exact isometry of the board's neutral (mid-depth) surface,
so flat lengths equal formed lengths there.

Folding order does not change the final shape, only which part stays put.
Bends are applied outermost-last with respect to the anchored region (the
side of the lowest-sequence axis away from its fold direction), which keeps
every bend's map valid while earlier-folded material rides along rigidly.
Collinear bends on the same axis line combine by summing their angles, so a
fold followed by its exact inverse restores the flat board.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .geometry import BendLine, Mesh, segments_intersect


@dataclass(frozen=True)
class _Frame:
    origin: np.ndarray      # point on the axis
    s_hat: np.ndarray       # unit normal toward the moving side
    t_hat: np.ndarray       # unit direction along the axis
    theta: float            # net signed fold angle, radians (+ is toward +z)
    radius: float
    min_sequence: int

    @property
    def arc_length(self) -> float:
        return self.radius * abs(self.theta)


def _axis_key(bend: BendLine) -> tuple[int, int, int, int]:
    """Canonical key identifying the infinite line of the axis plus radius."""
    dx, dy = bend.direction
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    # signed offset of the line from the origin
    c = dx * bend.start[1] - dy * bend.start[0]
    q = 1e-9
    return (round(dx / q), round(dy / q), round(c / q), round(bend.radius / q))


def check_axes_disjoint(bends) -> None:
    """Raise LayoutError when two non-collinear bend axes cross.

    Collinear axes are allowed: they model re-bending the same crease and
    their angles combine.
    """
    bends = list(bends)
    for i in range(len(bends)):
        for j in range(i + 1, len(bends)):
            a, b = bends[i], bends[j]
            if _axis_key(a)[:3] == _axis_key(b)[:3]:
                continue
            hit = segments_intersect(a.start, a.end, b.start, b.end)
            if hit is not None:
                raise LayoutError(
                    f"bend axes {a.id!r} and {b.id!r} cross at "
                    f"({hit[0]:.3f}, {hit[1]:.3f})")


def _build_frames(bends, points_xy: np.ndarray) -> list[_Frame]:
    """Group collinear bends, orient every axis away from the anchored
    region, and return frames in application order (deepest first)."""
    groups: dict[tuple, list[BendLine]] = {}
    for b in sorted(bends, key=lambda b: (b.sequence_index, b.id)):
        groups.setdefault(_axis_key(b), []).append(b)

    raw = []
    for members in groups.values():
        first = members[0]
        theta = math.radians(sum(m.angle_deg for m in members))
        if abs(theta) < 1e-15:
            continue
        d = np.array(first.direction)
        left = np.array([-d[1], d[0]])
        raw.append({
            "origin": np.array(first.start, dtype=float),
            "left": left,
            "t_hat": d,
            "theta": theta,
            "radius": first.radius,
            "mid": (np.array(first.start) + np.array(first.end)) / 2.0,
            "min_seq": min(m.sequence_index for m in members),
        })
    if not raw:
        return []

    # Anchor: the board region on the negative-left side of the first axis.
    first = min(raw, key=lambda g: g["min_seq"])
    if len(points_xy):
        s_first = (points_xy - first["origin"]) @ first["left"]
        anchored = s_first < -1e-9
        if anchored.any():
            candidates = points_xy[anchored]
        else:
            candidates = points_xy
        # farthest from every axis line, for robust side classification
        score = np.full(len(candidates), np.inf)
        for g in raw:
            score = np.minimum(score, np.abs((candidates - g["origin"]) @ g["left"]))
        root_ref = candidates[int(np.argmax(score))]
    else:
        root_ref = first["origin"] - first["left"]

    frames = []
    for g in raw:
        s_root = float((root_ref - g["origin"]) @ g["left"])
        s_hat = -g["left"] if s_root > 0 else g["left"]
        frames.append((g, s_hat))

    def depth(entry) -> int:
        g, _ = entry
        n = 0
        for other, other_s_hat in frames:
            if other is g:
                continue
            if float((g["mid"] - other["origin"]) @ other_s_hat) > 1e-9:
                n += 1
        return n

    ordered = sorted(frames, key=lambda e: (-depth(e), -e[0]["min_seq"]))
    return [_Frame(origin=g["origin"], s_hat=s_hat, t_hat=g["t_hat"],
                   theta=g["theta"], radius=g["radius"],
                   min_sequence=g["min_seq"])
            for g, s_hat in ordered]


def _apply_frame(xyz: np.ndarray, frame: _Frame, neutral_z: float) -> np.ndarray:
    rel = xyz[:, :2] - frame.origin
    s = rel @ frame.s_hat
    t = rel @ frame.t_hat
    z = xyz[:, 2]

    mirrored = frame.theta < 0
    theta = abs(frame.theta)
    z_in = (2.0 * neutral_z - z) if mirrored else z

    radius = frame.radius
    arc = radius * theta
    s0 = -arc / 2.0
    rho = radius - (z_in - neutral_z)
    sin_t, cos_t = math.sin(theta), math.cos(theta)

    in_flat = s <= s0
    in_rigid = s >= s0 + arc
    phi = np.clip((s - s0) / radius, 0.0, theta)
    tail = s - s0 - arc

    s_band = s0 + rho * np.sin(phi)
    z_band = neutral_z + radius - rho * np.cos(phi)
    s_rigid = s0 + rho * sin_t + tail * cos_t
    z_rigid = neutral_z + radius - rho * cos_t + tail * sin_t

    s_out = np.where(in_flat, s, np.where(in_rigid, s_rigid, s_band))
    z_out = np.where(in_flat, z_in, np.where(in_rigid, z_rigid, z_band))
    if mirrored:
        z_out = 2.0 * neutral_z - z_out

    xy = frame.origin + np.outer(s_out, frame.s_hat) + np.outer(t, frame.t_hat)
    return np.column_stack([xy, z_out])


def fold_points(points: np.ndarray, bends, neutral_z: float,
                domain_xy: np.ndarray | None = None) -> np.ndarray:
    """Fold arbitrary 3D sample points with the same map as fold_preview.

    domain_xy should be the board's flat footprint (e.g. outline vertices);
    it anchors which side of the first axis stays fixed. Without it the
    sample points themselves decide, which only matches the board's fold
    when they span the fixed side.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    check_axes_disjoint(bends)
    domain = (np.asarray(domain_xy, dtype=float).reshape(-1, 2)
              if domain_xy is not None else pts[:, :2])
    frames = _build_frames(bends, domain)
    out = pts.copy()
    for frame in frames:
        out = _apply_frame(out, frame, neutral_z)
    return out


def fold_preview(flat_solid: Mesh, bends, neutral_z: float | None = None,
                 detect_self_intersections: bool = True) -> Mesh:
    """Apply the bends to a flat board mesh. Vertex count is unchanged;
    subdivide beforehand (refine_for_bends) if curved bands should render
    smoothly.

    neutral_z defaults to the mesh's mid-depth. A fold that makes the mesh
    pass through itself sets a warning on the result instead of failing.
    """
    bends = list(bends)
    if not bends:
        return Mesh(flat_solid.vertices.copy(), flat_solid.triangles.copy())
    check_axes_disjoint(bends)
    if neutral_z is None:
        lo, hi = flat_solid.bounds()
        neutral_z = float(lo[2] + hi[2]) / 2.0
    frames = _build_frames(bends, flat_solid.vertices[:, :2])
    verts = flat_solid.vertices.copy()
    for frame in frames:
        verts = _apply_frame(verts, frame, neutral_z)
    folded = Mesh(verts, flat_solid.triangles.copy())
    if detect_self_intersections and folded.triangle_count:
        if find_self_intersections(folded, limit=1):
            folded = Mesh(verts, folded.triangles,
                          ("fold causes the board to intersect itself",))
    return folded


# ---------------------------------------------------------------------------
# mesh refinement near bend bands
# ---------------------------------------------------------------------------

def refine_for_bends(mesh: Mesh, bends, arc_segments: int = 12,
                     max_passes: int = 48) -> Mesh:
    """Split triangle edges that span a bend band until each spans at most
    1/arc_segments of the band, so the folded band renders as a smooth arc.
    Splits are midpoint bisections shared across adjacent triangles, which
    preserves closedness."""
    bands = []
    for b in bends:
        arc = b.arc_length
        if arc <= 0:
            continue
        d = np.array(b.direction)
        normal = np.array([-d[1], d[0]])
        bands.append((np.array(b.start, dtype=float), normal, arc / 2.0,
                      arc / arc_segments))
    if not bands or not mesh.triangle_count:
        return Mesh(mesh.vertices.copy(), mesh.triangles.copy(), mesh.warnings)

    verts: list[np.ndarray] = [v for v in mesh.vertices]
    tris: list[tuple[int, int, int]] = [tuple(int(i) for i in t)
                                        for t in mesh.triangles]

    def needs_split(pa: np.ndarray, pb: np.ndarray) -> bool:
        for origin, normal, half, step in bands:
            sa = float((pa[:2] - origin) @ normal)
            sb = float((pb[:2] - origin) @ normal)
            lo, hi = (sa, sb) if sa <= sb else (sb, sa)
            overlap = min(hi, half) - max(lo, -half)
            if overlap > step:
                return True
        return False

    for _ in range(max_passes):
        midpoint: dict[tuple[int, int], int] = {}
        to_split: set[tuple[int, int]] = set()
        for a, b, c in tris:
            for i, j in ((a, b), (b, c), (c, a)):
                key = (min(i, j), max(i, j))
                if key in to_split:
                    continue
                if needs_split(verts[i], verts[j]):
                    to_split.add(key)
        if not to_split:
            break
        for key in sorted(to_split):
            i, j = key
            midpoint[key] = len(verts)
            verts.append((verts[i] + verts[j]) / 2.0)

        new_tris: list[tuple[int, int, int]] = []
        for tri in tris:
            _subdivide(tri, midpoint, new_tris)
        tris = new_tris

    return Mesh(np.array(verts), np.array(tris, dtype=np.int64), mesh.warnings)


def _subdivide(tri: tuple[int, int, int],
               midpoint: dict[tuple[int, int], int],
               out: list[tuple[int, int, int]]) -> None:
    def mid(i: int, j: int) -> int | None:
        return midpoint.get((min(i, j), max(i, j)))

    a, b, c = tri
    mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
    n = sum(m is not None for m in (mab, mbc, mca))
    if n == 0:
        out.append(tri)
    elif n == 3:
        out.extend([(a, mab, mca), (b, mbc, mab), (c, mca, mbc), (mab, mbc, mca)])
    elif n == 1:
        # rotate so the split edge is (a, b)
        while mab is None:
            a, b, c = b, c, a
            mab, mbc, mca = mbc, mca, mab
        out.extend([(a, mab, c), (mab, b, c)])
    else:
        # rotate so the unsplit edge is (c, a)
        while mca is not None:
            a, b, c = b, c, a
            mab, mbc, mca = mbc, mca, mab
        out.extend([(a, mab, mbc), (a, mbc, c), (mab, b, mbc)])


# ---------------------------------------------------------------------------
# self-intersection detection (transversal triangle-triangle crossings)
# ---------------------------------------------------------------------------

_EPS = 1e-7


def find_self_intersections(mesh: Mesh, limit: int = 8) -> list[tuple[int, int]]:
    """Pairs of triangles that pierce each other.

    Coplanar contact is ignored: stacked shells share walls by construction
    and folded faces may legitimately touch. Triangles sharing a vertex
    (by index or position) are skipped as neighbors.
    """
    m = mesh.triangle_count
    if m < 2:
        return []
    pts = mesh.triangle_points()
    lo = pts.min(axis=1) - _EPS
    hi = pts.max(axis=1) + _EPS

    # vertex position keys for neighbor exclusion across shells
    keys = np.round(mesh.vertices / 1e-7).astype(np.int64)
    _, vid = np.unique(keys, axis=0, return_inverse=True)
    tri_vids = vid[mesh.triangles]

    # x-sweep collects bbox-overlapping candidate pairs
    order = np.argsort(lo[:, 0], kind="stable")
    sorted_lo = lo[order]
    sorted_hi = hi[order]
    chunks_i: list[np.ndarray] = []
    chunks_j: list[np.ndarray] = []
    for pos in range(m):
        right = int(np.searchsorted(sorted_lo[:, 0], sorted_hi[pos, 0], side="right"))
        if right <= pos + 1:
            continue
        cand = slice(pos + 1, right)
        box = ((sorted_lo[cand] <= sorted_hi[pos]) &
               (sorted_hi[cand] >= sorted_lo[pos])).all(axis=1)
        js = order[cand][box]
        if js.size:
            chunks_i.append(np.full(js.size, order[pos], dtype=np.int64))
            chunks_j.append(js)
    if not chunks_i:
        return []
    I = np.concatenate(chunks_i)
    J = np.concatenate(chunks_j)

    shared = (tri_vids[I][:, :, None] == tri_vids[J][:, None, :]).any(axis=(1, 2))
    I, J = I[~shared], J[~shared]
    if not I.size:
        return []

    # a pierce needs both triangles to straddle the other's plane strictly;
    # this also drops coplanar contact and plane-touching neighbors
    t1 = pts[I]
    t2 = pts[J]
    n2 = np.cross(t2[:, 1] - t2[:, 0], t2[:, 2] - t2[:, 0])
    dv1 = np.einsum("pij,pj->pi", t1, n2) - np.einsum("pj,pj->p", n2, t2[:, 0])[:, None]
    n1 = np.cross(t1[:, 1] - t1[:, 0], t1[:, 2] - t1[:, 0])
    dv2 = np.einsum("pij,pj->pi", t2, n1) - np.einsum("pj,pj->p", n1, t1[:, 0])[:, None]
    keep = ((dv1 > _EPS).any(axis=1) & (dv1 < -_EPS).any(axis=1) &
            (dv2 > _EPS).any(axis=1) & (dv2 < -_EPS).any(axis=1))

    hits: list[tuple[int, int]] = []
    for i, j in zip(I[keep], J[keep]):
        if _tri_tri_pierce(pts[i], pts[j]):
            pair = (int(min(i, j)), int(max(i, j)))
            hits.append(pair)
            if len(hits) >= limit:
                break
    return sorted(set(hits))


def _tri_tri_pierce(t1: np.ndarray, t2: np.ndarray) -> bool:
    """Moller-style interval test; True only for transversal penetration."""
    n2 = np.cross(t2[1] - t2[0], t2[2] - t2[0])
    d2 = -float(n2 @ t2[0])
    dv1 = t1 @ n2 + d2
    if (dv1 > _EPS).all() or (dv1 < -_EPS).all():
        return False
    n1 = np.cross(t1[1] - t1[0], t1[2] - t1[0])
    d1 = -float(n1 @ t1[0])
    dv2 = t2 @ n1 + d1
    if (dv2 > _EPS).all() or (dv2 < -_EPS).all():
        return False
    if (np.abs(dv1) <= _EPS).all() or (np.abs(dv2) <= _EPS).all():
        return False  # coplanar: contact, not penetration

    direction = np.cross(n1, n2)
    axis = int(np.argmax(np.abs(direction)))
    i1 = _interval(t1[:, axis], dv1)
    i2 = _interval(t2[:, axis], dv2)
    if i1 is None or i2 is None:
        return False
    return min(i1[1], i2[1]) - max(i1[0], i2[0]) > _EPS


def _interval(proj: np.ndarray, dv: np.ndarray) -> tuple[float, float] | None:
    """Projection interval of a triangle's crossing segment on the
    intersection line."""
    pos = dv > _EPS
    neg = dv < -_EPS
    if not pos.any() or not neg.any():
        # grazing contact within tolerance
        return None
    # index of the lone vertex on its own side
    if pos.sum() == 1:
        solo = int(np.argmax(pos))
    else:
        solo = int(np.argmax(neg))
    others = [k for k in range(3) if k != solo]
    ts = []
    for k in others:
        denom = dv[solo] - dv[k]
        t = proj[solo] + (proj[k] - proj[solo]) * dv[solo] / denom
        ts.append(float(t))
    return (min(ts), max(ts))
