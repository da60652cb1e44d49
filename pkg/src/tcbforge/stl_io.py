"""Binary STL export.

Little-endian layout: 80-byte header, uint32 triangle count, then 50 bytes
per triangle (normal, three vertices as float32, uint16 attribute). The
header is a fixed tag, never a timestamp, so output is bit-deterministic.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import StlError
from .geometry import Mesh

HEADER_TAG = b"tcbforge binary STL"
TRIANGLE_RECORD = struct.Struct("<12fH")


def export_stl(mesh: Mesh) -> bytes:
    """Serialize a watertight mesh. Normals are recomputed from vertex
    winding; triangle order follows the mesh exactly."""
    open_edges = mesh.open_edges()
    if open_edges:
        shown = ", ".join(f"{i}-{j}" for i, j in open_edges[:8])
        more = "" if len(open_edges) <= 8 else f" (+{len(open_edges) - 8} more)"
        raise StlError(f"mesh is not watertight; open edges: {shown}{more}")

    header = HEADER_TAG.ljust(80, b" ")
    parts = [header, struct.pack("<I", mesh.triangle_count)]
    points = mesh.triangle_points()
    normals = mesh.face_normals()
    for tri, normal in zip(points, normals):
        values = [float(x) for x in normal]
        for vertex in tri:
            values.extend(float(x) for x in vertex)
        parts.append(TRIANGLE_RECORD.pack(*values, 0))
    return b"".join(parts)


def stl_byte_size(triangle_count: int) -> int:
    return 80 + 4 + 50 * triangle_count


def mesh_from_stl(data: bytes) -> Mesh:
    """Parse binary STL back into a mesh (vertices deduplicated by exact
    position). Intended for tooling; the writer is the authoritative path."""
    if len(data) < 84:
        raise StlError("truncated STL: missing header")
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) < stl_byte_size(count):
        raise StlError(f"truncated STL: {count} triangles declared")
    index: dict[tuple[float, float, float], int] = {}
    vertices: list[tuple[float, float, float]] = []
    triangles = []
    offset = 84
    for _ in range(count):
        record = TRIANGLE_RECORD.unpack_from(data, offset)
        offset += TRIANGLE_RECORD.size
        tri = []
        for k in range(3):
            p = (record[3 + 3 * k], record[4 + 3 * k], record[5 + 3 * k])
            if p not in index:
                index[p] = len(vertices)
                vertices.append(p)
            tri.append(index[p])
        triangles.append(tri)
    return Mesh(np.array(vertices, dtype=np.float64).reshape(-1, 3),
                np.array(triangles, dtype=np.int64).reshape(-1, 3))
