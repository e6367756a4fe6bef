"""Triangle meshes and their plain-text (OBJ) serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MAX_VERTICES = 10**7


@dataclass
class MeshPatch:
    vertices: np.ndarray  # (n, 3)
    faces: np.ndarray  # (m, 3) int
    normals: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face index out of range")

    def face_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def grid_faces(n_rows: int, n_cols: int, wrap_cols: bool = False) -> np.ndarray:
    """Two triangles per grid cell of a row-major ``n_rows x n_cols`` vertex grid."""
    cols = n_cols if wrap_cols else n_cols - 1
    i, j = np.meshgrid(np.arange(n_rows - 1), np.arange(cols), indexing="ij")
    i, j = i.ravel(), j.ravel()
    jn = (j + 1) % n_cols
    v00 = i * n_cols + j
    v10 = (i + 1) * n_cols + j
    v11 = (i + 1) * n_cols + jn
    v01 = i * n_cols + jn
    tri = np.empty((2 * len(i), 3), dtype=np.int64)
    tri[0::2] = np.stack([v00, v10, v11], axis=1)
    tri[1::2] = np.stack([v00, v11, v01], axis=1)
    return tri


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_obj(mesh: MeshPatch, stream) -> None:
    """OBJ text: ``#@ key = json`` metadata comment lines, then v/vn/f records."""
    for key in sorted(mesh.meta):
        stream.write(f"#@ {key} = {json.dumps(mesh.meta[key], sort_keys=True)}\n")
    for v in mesh.vertices:
        stream.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
    if mesh.normals is not None:
        for n in mesh.normals:
            stream.write(f"vn {_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])}\n")
    with_n = mesh.normals is not None
    for f in mesh.faces + 1:
        if with_n:
            stream.write(f"f {f[0]}//{f[0]} {f[1]}//{f[1]} {f[2]}//{f[2]}\n")
        else:
            stream.write(f"f {f[0]} {f[1]} {f[2]}\n")


def read_obj(stream) -> MeshPatch:
    meta, verts, norms, faces = {}, [], [], []
    for line in stream:
        if line.startswith("#@ "):
            key, _, val = line[3:].partition(" = ")
            meta[key] = json.loads(val)
            continue
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "vn":
            norms.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return MeshPatch(np.array(verts), np.array(faces), np.array(norms) if norms else None, meta)
