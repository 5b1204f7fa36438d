"""Polygonal meshes on the unit square: generators, validation, triangulation.

A mesh is a flat container of vertex coordinates, polygonal elements (CCW
vertex loops, possibly non-convex) and derived edges.  Every edge carries a
canonical orientation -- from the endpoint with the smaller global vertex
index to the larger one -- so that polynomial data attached to an edge is
parameterized identically from both neighboring elements.  Meshes are treated
as immutable once built; all stages downstream only read them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MESH_FAMILIES = ("quad", "triangle", "nonconvex_L")

# Total element area must reproduce the domain area to this relative accuracy.
DOMAIN_AREA_RTOL = 1e-12


class TriangulationError(ValueError):
    """Polygon cannot be triangulated (degenerate, collinear, or CW loop)."""


# ---------------------------------------------------------------------------
# basic polygon geometry


def polygon_signed_area(coords: np.ndarray) -> float:
    """Shoelace signed area of a closed polygon (positive for CCW loops)."""
    x, y = coords[:, 0], coords[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(coords: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon."""
    x, y = coords[:, 0], coords[:, 1]
    xr, yr = np.roll(x, -1), np.roll(y, -1)
    cross = x * yr - xr * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-300:
        return coords.mean(axis=0)
    cx = float(np.sum((x + xr) * cross)) / (6.0 * area)
    cy = float(np.sum((y + yr) * cross)) / (6.0 * area)
    return np.array([cx, cy])


def polygon_diameter(coords: np.ndarray) -> float:
    """Maximum pairwise vertex distance."""
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _loop_is_convex(coords: np.ndarray, diameter: float) -> bool:
    # Convex iff every signed cross product of consecutive edge vectors of the
    # CCW loop stays above -1e-14 * h_T^2 (flat corners count as convex).
    tol = -1e-14 * diameter**2
    n = len(coords)
    for i in range(n):
        a = coords[(i + 1) % n] - coords[i]
        b = coords[(i + 2) % n] - coords[(i + 1) % n]
        if _cross(a, b) < tol:
            return False
    return True


def _segments_cross(p1, p2, p3, p4, eps) -> bool:
    """True if open segments (p1,p2) and (p3,p4) properly intersect."""
    d1 = _cross(p4 - p3, p1 - p3)
    d2 = _cross(p4 - p3, p2 - p3)
    d3 = _cross(p2 - p1, p3 - p1)
    d4 = _cross(p2 - p1, p4 - p1)
    return ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    )


def polygon_is_simple(coords: np.ndarray) -> bool:
    """Check that no two non-adjacent boundary segments intersect."""
    n = len(coords)
    eps = 1e-14 * max(polygon_diameter(coords), 1e-300) ** 2
    for i in range(n):
        a1, a2 = coords[i], coords[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = coords[j], coords[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2, eps):
                return False
    return True


# ---------------------------------------------------------------------------
# mesh data model


@dataclass
class Edge:
    """Straight mesh edge with canonical (ascending vertex id) orientation."""

    id: int
    vertex_ids: tuple[int, int]
    a: np.ndarray
    b: np.ndarray
    length: float
    tangent: np.ndarray
    element_ids: tuple[int, ...] = ()
    normals: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def on_boundary(self) -> bool:
        return len(self.element_ids) == 1

    def point_at(self, t) -> np.ndarray:
        """Map arc parameters t in [0, 1] to physical coordinates, shape (n, 2)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.a[None, :] + t[:, None] * (self.b - self.a)[None, :]


@dataclass
class Element:
    """Polygonal element: CCW vertex loop plus derived geometry."""

    id: int
    vertex_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]
    coords: np.ndarray
    centroid: np.ndarray
    area: float
    diameter: float
    is_convex: bool

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)


@dataclass
class Mesh:
    vertices: np.ndarray
    elements: list[Element]
    edges: list[Edge]
    mesh_size_h: float

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def element_edges(self, element: Element) -> list[Edge]:
        return [self.edges[i] for i in element.edge_ids]


def build_mesh(vertices: np.ndarray, loops: list[list[int]]) -> Mesh:
    """Assemble a Mesh from vertex coordinates and CCW element vertex loops.

    Edges are discovered from consecutive loop pairs and deduplicated by their
    (sorted) endpoint ids, which also fixes the canonical edge orientation.
    """
    vertices = np.asarray(vertices, dtype=float)
    edge_ids: dict[tuple[int, int], int] = {}
    edges: list[Edge] = []
    elements: list[Element] = []

    for eid, loop in enumerate(loops):
        loop = list(int(v) for v in loop)
        coords = vertices[loop]
        diameter = polygon_diameter(coords)
        area = polygon_signed_area(coords)
        element_edge_ids = []
        nv = len(loop)
        for i in range(nv):
            va, vb = loop[i], loop[(i + 1) % nv]
            key = (min(va, vb), max(va, vb))
            if key not in edge_ids:
                pa, pb = vertices[key[0]], vertices[key[1]]
                length = float(np.linalg.norm(pb - pa))
                tangent = (pb - pa) / length if length > 0 else np.zeros(2)
                edge_ids[key] = len(edges)
                edges.append(
                    Edge(
                        id=len(edges),
                        vertex_ids=key,
                        a=pa,
                        b=pb,
                        length=length,
                        tangent=tangent,
                    )
                )
            ge = edge_ids[key]
            element_edge_ids.append(ge)
            # Outward normal of a CCW loop: rotate the traversal direction -90deg.
            d = vertices[vb] - vertices[va]
            nrm = np.linalg.norm(d)
            normal = np.array([d[1], -d[0]]) / nrm if nrm > 0 else np.zeros(2)
            edges[ge].normals[eid] = normal
            edges[ge].element_ids = edges[ge].element_ids + (eid,)
        elements.append(
            Element(
                id=eid,
                vertex_ids=tuple(loop),
                edge_ids=tuple(element_edge_ids),
                coords=coords,
                centroid=polygon_centroid(coords),
                area=abs(area),
                diameter=diameter,
                is_convex=_loop_is_convex(coords, diameter),
            )
        )

    h = max(el.diameter for el in elements) if elements else 0.0
    return Mesh(vertices=vertices, elements=elements, edges=edges, mesh_size_h=h)


# ---------------------------------------------------------------------------
# generators on the unit square


def generate_mesh(nx: int, ny: int, family: str = "quad") -> Mesh:
    """Partition the unit square into nx-by-ny cells of the given family.

    Families:
      quad        -- nx*ny axis-aligned squares
      triangle    -- each cell split along its bottom-left/top-right diagonal
      nonconvex_L -- each 2x2 cell block becomes one square plus one L-shaped
                     hexagon with a reflex corner (requires even nx, ny);
                     blocks alternate orientation in a checkerboard so that
                     neighboring blocks share whole edges
    """
    if family not in MESH_FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}; choose from {MESH_FAMILIES}")
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")

    def vid(i, j):
        return j * (nx + 1) + i

    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    verts = np.array([[x, y] for y in ys for x in xs])

    loops: list[list[int]] = []
    if family == "quad":
        for j in range(ny):
            for i in range(nx):
                loops.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    elif family == "triangle":
        for j in range(ny):
            for i in range(nx):
                loops.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)])
                loops.append([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)])
    else:  # nonconvex_L
        if nx % 2 or ny % 2:
            raise ValueError("nonconvex_L requires even nx and ny")
        for bj in range(ny // 2):
            for bi in range(nx // 2):
                i0, j0 = 2 * bi, 2 * bj
                if (bi + bj) % 2 == 0:
                    # L fills the block minus its top-right cell
                    ell = [(i0, j0), (i0 + 2, j0), (i0 + 2, j0 + 1),
                           (i0 + 1, j0 + 1), (i0 + 1, j0 + 2), (i0, j0 + 2)]
                    sq = [(i0 + 1, j0 + 1), (i0 + 2, j0 + 1),
                          (i0 + 2, j0 + 2), (i0 + 1, j0 + 2)]
                else:
                    # rotated 180 degrees: L fills the block minus its bottom-left cell
                    ell = [(i0 + 1, j0), (i0 + 2, j0), (i0 + 2, j0 + 2),
                           (i0, j0 + 2), (i0, j0 + 1), (i0 + 1, j0 + 1)]
                    sq = [(i0, j0), (i0 + 1, j0), (i0 + 1, j0 + 1), (i0, j0 + 1)]
                loops.append([vid(i, j) for i, j in ell])
                loops.append([vid(i, j) for i, j in sq])
        # the long L edges skip some grid points; drop the unused vertices
        used = sorted({v for loop in loops for v in loop})
        remap = {old: new for new, old in enumerate(used)}
        verts = verts[used]
        loops = [[remap[v] for v in loop] for loop in loops]

    return build_mesh(verts, loops)


# ---------------------------------------------------------------------------
# triangulation (quadrature support, works for non-convex polygons)


def _point_in_triangle(p, a, b, c, eps) -> bool:
    d1 = _cross(b - a, p - a)
    d2 = _cross(c - b, p - b)
    d3 = _cross(a - c, p - c)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def _ear_clip(coords: np.ndarray, diameter: float) -> list[tuple[int, int, int]]:
    n = len(coords)
    idx = list(range(n))
    eps = 1e-12 * diameter**2
    tris: list[tuple[int, int, int]] = []
    while len(idx) > 3:
        clipped = False
        for flat_ok in (False, True):
            m = len(idx)
            for pos in range(m):
                ip, ic, inx = idx[pos - 1], idx[pos], idx[(pos + 1) % m]
                a, b, c = coords[ip], coords[ic], coords[inx]
                cr = _cross(b - a, c - b)
                if cr <= (eps if not flat_ok else -eps):
                    continue
                others = (coords[j] for j in idx if j not in (ip, ic, inx))
                if any(_point_in_triangle(p, a, b, c, eps) for p in others):
                    continue
                tris.append((ip, ic, inx))
                idx.pop(pos)
                clipped = True
                break
            if clipped:
                break
        if not clipped:
            raise TriangulationError("no ear found; polygon is not simple or is degenerate")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def triangulate(element: Element) -> np.ndarray:
    """Partition an element into triangles, shape (nt, 3, 2).

    Convex polygons are fanned from vertex 0; non-convex ones are ear-clipped.
    The triangle areas must reproduce the element area exactly (checked to
    1e-13 relative), otherwise a TriangulationError is raised.
    """
    coords = element.coords
    n = len(coords)
    signed = polygon_signed_area(coords)
    if abs(signed) <= 1e-14 * element.diameter**2:
        raise TriangulationError(f"element {element.id} is degenerate (zero area)")
    if signed < 0:
        raise TriangulationError(f"element {element.id} vertex loop is not CCW")

    if n == 3:
        tris = coords[None, :, :]
    elif element.is_convex:
        tris = np.array([[coords[0], coords[i], coords[i + 1]] for i in range(1, n - 1)])
    else:
        index_tris = _ear_clip(coords, element.diameter)
        tris = np.array([[coords[i], coords[j], coords[k]] for i, j, k in index_tris])

    areas = 0.5 * np.abs(
        (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
        - (tris[:, 2, 0] - tris[:, 0, 0]) * (tris[:, 1, 1] - tris[:, 0, 1])
    )
    if abs(float(areas.sum()) - element.area) > 1e-13 * element.area:
        raise TriangulationError(
            f"triangulation of element {element.id} does not cover it exactly"
        )
    return tris


# ---------------------------------------------------------------------------
# validation


@dataclass
class Issue:
    code: str
    message: str


@dataclass
class ValidationReport:
    issues: list[Issue]

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}

    def __str__(self) -> str:
        if self.ok:
            return "mesh valid"
        return "\n".join(f"[{i.code}] {i.message}" for i in self.issues)


def _boundary_cycles(mesh: Mesh, issues: list[Issue]) -> list[list[int]] | None:
    """Walk boundary edges into vertex cycles; report broken loops."""
    incident: dict[int, list[int]] = {}
    boundary = [e for e in mesh.edges if e.on_boundary]
    for e in boundary:
        for v in e.vertex_ids:
            incident.setdefault(v, []).append(e.id)
    bad = [v for v, es in incident.items() if len(es) != 2]
    if bad:
        issues.append(
            Issue("boundary_loop", f"boundary vertices {sorted(bad)} do not have exactly 2 boundary edges")
        )
        return None
    cycles = []
    seen: set[int] = set()
    for start in boundary:
        if start.id in seen:
            continue
        cycle = [start.vertex_ids[0]]
        v = start.vertex_ids[1]
        e = start
        seen.add(e.id)
        while v != cycle[0]:
            cycle.append(v)
            nxt = [mesh.edges[i] for i in incident[v] if i != e.id]
            if not nxt:
                issues.append(Issue("boundary_loop", f"boundary walk stuck at vertex {v}"))
                return None
            e = nxt[0]
            seen.add(e.id)
            v = e.vertex_ids[0] if e.vertex_ids[1] == v else e.vertex_ids[1]
        cycles.append(cycle)
    return cycles


def validate(mesh: Mesh) -> ValidationReport:
    """Check every mesh/element/edge invariant; returns a report, never raises."""
    issues: list[Issue] = []

    for el in mesh.elements:
        signed = polygon_signed_area(el.coords)
        if signed <= 0:
            issues.append(Issue("ccw", f"element {el.id}: vertex loop is not counter-clockwise"))
        if not polygon_is_simple(el.coords):
            issues.append(Issue("simple", f"element {el.id}: vertex loop self-intersects"))
        d = polygon_diameter(el.coords)
        if abs(d - el.diameter) > 1e-12 * max(d, 1e-300):
            issues.append(Issue("geometry", f"element {el.id}: stored diameter is stale"))
        if el.is_convex != _loop_is_convex(el.coords, el.diameter):
            issues.append(Issue("convexity", f"element {el.id}: is_convex flag is inconsistent"))

    for e in mesh.edges:
        if len(e.element_ids) not in (1, 2):
            issues.append(
                Issue("edge_sharing", f"edge {e.id} is shared by {len(e.element_ids)} elements")
            )
            continue
        if abs(np.linalg.norm(e.tangent) - 1.0) > 1e-12:
            issues.append(Issue("edge_geometry", f"edge {e.id}: tangent is not unit length"))
        for eid, nrm in e.normals.items():
            if abs(np.linalg.norm(nrm) - 1.0) > 1e-12 or abs(float(nrm @ e.tangent)) > 1e-12:
                issues.append(
                    Issue("edge_geometry", f"edge {e.id}: normal for element {eid} is not a unit vector orthogonal to the tangent")
                )
        if len(e.element_ids) == 2:
            n1, n2 = (e.normals[i] for i in e.element_ids)
            if np.linalg.norm(n1 + n2) > 1e-12:
                issues.append(
                    Issue("edge_geometry", f"edge {e.id}: the two element normals are not opposite")
                )

    cycles = _boundary_cycles(mesh, issues)
    if cycles is not None:
        domain_area = sum(
            abs(polygon_signed_area(mesh.vertices[cycle])) for cycle in cycles
        )
        total = math.fsum(el.area for el in mesh.elements)
        if abs(total - domain_area) > DOMAIN_AREA_RTOL * max(domain_area, 1e-300):
            issues.append(
                Issue(
                    "area_coverage",
                    f"element areas sum to {total!r} but the boundary encloses {domain_area!r}",
                )
            )
    return ValidationReport(issues)


# ---------------------------------------------------------------------------
# JSON I/O


def mesh_to_dict(mesh: Mesh) -> dict:
    return {
        "vertices": [[float(x), float(y)] for x, y in mesh.vertices],
        "elements": [list(map(int, el.vertex_ids)) for el in mesh.elements],
    }


def mesh_from_dict(data: dict) -> Mesh:
    return build_mesh(np.asarray(data["vertices"], dtype=float), data["elements"])


def save_mesh(mesh: Mesh, path) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(mesh), indent=1))


def load_mesh(path) -> Mesh:
    return mesh_from_dict(json.loads(Path(path).read_text()))
