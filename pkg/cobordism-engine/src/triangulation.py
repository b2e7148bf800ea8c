"""
Triangulated closed manifolds of dimension 2 and 3.

A Triangulation lists its top simplices as sorted tuples over the dense
vertex set 0..V-1; the numeric order is the global vertex order used by the
cup and cap products. Circle products and mapping tori are built from layers
of prisms, each split into three tetrahedra by the staircase on the vertex
order. Surfaces come from minimal triangulations and connected sums.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .dependencies import DomainError
from .gf2 import BitVector
from .schemas import ValidationIssue, ValidationReport

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]

MIN_LAYERS = 3


class TriangulationError(DomainError):
    """Invalid triangulation, automorphism or builder argument"""


class DualEdge(NamedTuple):
    neighbor: int
    flip: int
    face: Simplex


@dataclass(frozen=True)
class Triangulation:
    dim: int
    vertex_count: int
    top_simplices: Tuple[Simplex, ...]
    name: str = field(default="", compare=False)

    @classmethod
    def from_simplices(
        cls,
        dim: int,
        simplices: Sequence[Sequence[int]],
        vertex_count: Optional[int] = None,
        name: str = "",
    ) -> "Triangulation":
        tops = tuple(tuple(sorted(int(v) for v in s)) for s in simplices)
        if vertex_count is None:
            vertex_count = 1 + max((max(s) for s in tops if s), default=-1)
        return cls(dim, vertex_count, tops, name)

    def to_text(self) -> str:
        lines = [f"dim {self.dim}", f"vertices {self.vertex_count}"]
        lines.extend(" ".join(str(v) for v in s) for s in self.top_simplices)
        return "\n".join(lines) + "\n"

    @cached_property
    def context_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("ascii")).hexdigest()[:16]

    @property
    def label(self) -> str:
        return self.name or self.context_hash

    @cached_property
    def skeleton(self) -> Tuple[Tuple[Simplex, ...], ...]:
        """Sorted k-simplices for k = 0..dim"""
        faces = [set() for _ in range(self.dim + 1)]
        for s in self.top_simplices:
            for k in range(self.dim + 1):
                faces[k].update(itertools.combinations(s, k + 1))
        return tuple(tuple(sorted(f)) for f in faces)

    def faces(self, k: int) -> Tuple[Simplex, ...]:
        return self.skeleton[k]

    @cached_property
    def face_index(self) -> Tuple[Dict[Simplex, int], ...]:
        return tuple({s: i for i, s in enumerate(level)} for level in self.skeleton)

    @cached_property
    def dual(self) -> Tuple[Tuple[DualEdge, ...], ...]:
        """Face adjacency of top simplices with the orientation flip bit of each gluing."""
        by_face: Dict[Simplex, List[Tuple[int, int]]] = defaultdict(list)
        for i, s in enumerate(self.top_simplices):
            for p in range(len(s)):
                by_face[s[:p] + s[p + 1:]].append((i, p))
        adjacency: List[List[DualEdge]] = [[] for _ in self.top_simplices]
        for face, entries in by_face.items():
            if len(entries) != 2:
                continue
            (i, p), (j, q) = entries
            # induced boundary orientations agree iff (p + q) is even
            flip = 1 if (p + q) % 2 == 0 else 0
            adjacency[i].append(DualEdge(j, flip, face))
            adjacency[j].append(DualEdge(i, flip, face))
        return tuple(tuple(a) for a in adjacency)

    @cached_property
    def vertex_star(self) -> Tuple[Tuple[int, ...], ...]:
        star: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for i, s in enumerate(self.top_simplices):
            for v in s:
                star[v].append(i)
        return tuple(tuple(x) for x in star)

    @cached_property
    def edge_star(self) -> Dict[Simplex, Tuple[int, ...]]:
        star: Dict[Simplex, List[int]] = defaultdict(list)
        for i, s in enumerate(self.top_simplices):
            for e in itertools.combinations(s, 2):
                star[e].append(i)
        return {e: tuple(v) for e, v in star.items()}

    @cached_property
    def validation(self) -> ValidationReport:
        return _validate(self)

    @cached_property
    def w1(self) -> BitVector:
        return w1_cochain(self)


@dataclass(frozen=True)
class SimplicialAutomorphism:
    source: Triangulation
    vertex_map: Tuple[int, ...]

    def __post_init__(self):
        V = self.source.vertex_count
        if len(self.vertex_map) != V or sorted(self.vertex_map) != list(range(V)):
            raise TriangulationError(f"vertex map is not a bijection of 0..{V - 1}")
        tops = set(self.source.top_simplices)
        for s in self.source.top_simplices:
            image = self.apply(s)
            if image not in tops:
                raise TriangulationError(f"vertex map sends simplex {list(s)} to non-simplex {list(image)}")

    @classmethod
    def identity(cls, source: Triangulation) -> "SimplicialAutomorphism":
        return cls(source, tuple(range(source.vertex_count)))

    def __call__(self, v: int) -> int:
        return self.vertex_map[v]

    def apply(self, simplex: Sequence[int]) -> Simplex:
        return tuple(sorted(self.vertex_map[v] for v in simplex))

    def compose(self, other: "SimplicialAutomorphism") -> "SimplicialAutomorphism":
        """self after other"""
        if other.source != self.source:
            raise TriangulationError("automorphisms act on different triangulations")
        return SimplicialAutomorphism(self.source, tuple(self.vertex_map[v] for v in other.vertex_map))

    def power(self, k: int) -> "SimplicialAutomorphism":
        if k < 0:
            raise TriangulationError("negative powers are not supported")
        result = SimplicialAutomorphism.identity(self.source)
        for _ in range(k):
            result = self.compose(result)
        return result

    def preserves_orientation(self) -> bool:
        """Whether the map carries the coherent orientation to itself (orientable source only)."""
        eps = _coherent_orientation(self.source)
        if eps is None:
            raise TriangulationError("orientation preservation needs an orientable source")
        index = {s: i for i, s in enumerate(self.source.top_simplices)}
        s = self.source.top_simplices[0]
        mapped = [self.vertex_map[v] for v in s]
        target = tuple(sorted(mapped))
        parity = _permutation_parity([target.index(v) for v in mapped])
        return (eps[0] ^ eps[index[target]] ^ parity) == 0


class DoubleCover(NamedTuple):
    cover: Triangulation
    is_orientable: bool
    sheet_map: Tuple[Tuple[int, int], ...]


def _permutation_parity(perm: Sequence[int]) -> int:
    parity = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                parity ^= 1
    return parity


def _issue(issues: List[ValidationIssue], code: str, message: str, simplex=None) -> None:
    issues.append(ValidationIssue(code=code, message=message, simplex=list(simplex) if simplex is not None else None))


def _validate(T: Triangulation) -> ValidationReport:
    issues: List[ValidationIssue] = []
    report = dict(dim=T.dim, vertex_count=T.vertex_count, top_simplex_count=len(T.top_simplices))

    if T.dim not in (2, 3):
        _issue(issues, "dimension", f"dimension {T.dim} is not 2 or 3")
    if not T.top_simplices:
        _issue(issues, "empty", "triangulation has no top simplices")
    seen = set()
    for s in T.top_simplices:
        if len(s) != T.dim + 1:
            _issue(issues, "arity", f"simplex {list(s)} has {len(s)} vertices, expected {T.dim + 1}", s)
        if any(not 0 <= v < T.vertex_count for v in s):
            _issue(issues, "vertex_range", f"simplex {list(s)} uses a vertex outside 0..{T.vertex_count - 1}", s)
        if len(set(s)) != len(s):
            _issue(issues, "repeated_vertex", f"simplex {list(s)} repeats a vertex", s)
        if s in seen:
            _issue(issues, "duplicate_simplex", f"simplex {list(s)} is listed twice", s)
        seen.add(s)
    if issues:
        return ValidationReport(valid=False, issues=issues, **report)

    used = set(itertools.chain.from_iterable(T.top_simplices))
    for v in range(T.vertex_count):
        if v not in used:
            _issue(issues, "unused_vertex", f"vertex {v} belongs to no simplex", (v,))

    face_count: Dict[Simplex, List[Simplex]] = defaultdict(list)
    for s in T.top_simplices:
        for face in itertools.combinations(s, T.dim):
            face_count[face].append(s)
    for face, owners in sorted(face_count.items()):
        if len(owners) == 1:
            _issue(issues, "open_face", f"face {list(face)} of simplex {list(owners[0])} is shared by 1 simplex", owners[0])
        elif len(owners) > 2:
            _issue(issues, "branching_face", f"face {list(face)} is shared by {len(owners)} simplices", owners[2])

    graph = nx.Graph()
    graph.add_nodes_from(T.top_simplices)
    for owners in face_count.values():
        graph.add_edges_from(itertools.combinations(owners, 2))
    components = sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0])
    if len(components) > 1:
        _issue(issues, "disconnected", f"complex has {len(components)} connected components", components[1][0])

    for v in sorted(used):
        link = [tuple(u for u in s if u != v) for s in T.top_simplices if v in s]
        if not _link_is_sphere(link, T.dim - 1):
            _issue(issues, "vertex_link", f"link of vertex {v} is not a {T.dim - 1}-sphere", (v,))

    valid = not issues
    euler = sum((-1) ** k * len(level) for k, level in enumerate(T.skeleton)) if valid else None
    orientable = _coherent_orientation(T) is not None if valid else None
    return ValidationReport(valid=valid, euler_characteristic=euler, orientable=orientable, issues=issues, **report)


def _link_is_sphere(link: List[Simplex], dim: int) -> bool:
    graph = nx.Graph()
    if dim == 1:
        graph.add_edges_from(link)
        return bool(link) and all(d == 2 for _, d in graph.degree()) and nx.is_connected(graph)
    edges: Dict[Simplex, int] = defaultdict(int)
    for t in link:
        for e in itertools.combinations(t, 2):
            edges[e] += 1
        graph.add_edges_from(itertools.combinations(t, 2))
    if not link or any(c != 2 for c in edges.values()) or not nx.is_connected(graph):
        return False
    return graph.number_of_nodes() - len(edges) + len(link) == 2


def validate(T: Triangulation) -> ValidationReport:
    return T.validation


def require_valid(T: Triangulation) -> None:
    report = T.validation
    if not report.valid:
        raise TriangulationError(f"invalid triangulation {T.label}: {report.issues[0].message}")


def _coherent_orientation(T: Triangulation) -> Optional[List[int]]:
    """Orientation bit per top simplex making every gluing compatible, or None."""
    eps: List[Optional[int]] = [None] * len(T.top_simplices)
    for root in range(len(T.top_simplices)):
        if eps[root] is not None:
            continue
        eps[root] = 0
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, flip, _ in T.dual[i]:
                want = eps[i] ^ flip
                if eps[j] is None:
                    eps[j] = want
                    queue.append(j)
                elif eps[j] != want:
                    return None
    return eps


def is_orientable(T: Triangulation) -> bool:
    require_valid(T)
    return _coherent_orientation(T) is not None


def orientation_double_cover(T: Triangulation) -> DoubleCover:
    """
    Two oriented copies of every top simplex, glued across each face so that
    orientations match: sheet s of one simplex meets sheet s ^ flip of its
    neighbour. Cover vertices are the classes of (simplex, sheet, vertex)
    under these gluings, numbered by first encounter.
    """
    require_valid(T)
    graph = nx.Graph()
    for i, s in enumerate(T.top_simplices):
        for sheet in (0, 1):
            graph.add_nodes_from((i, sheet, v) for v in s)
    for i, adjacency in enumerate(T.dual):
        for j, flip, face in adjacency:
            if j < i:
                continue
            for sheet in (0, 1):
                graph.add_edges_from(((i, sheet, v), (j, sheet ^ flip, v)) for v in face)

    component_of = {}
    for k, component in enumerate(nx.connected_components(graph)):
        for node in component:
            component_of[node] = k
    labels: Dict[int, int] = {}
    cover_simplices = []
    sheet_map = []
    for i, s in enumerate(T.top_simplices):
        for sheet in (0, 1):
            simplex = []
            for v in s:
                k = component_of[(i, sheet, v)]
                if k not in labels:
                    labels[k] = len(labels)
                simplex.append(labels[k])
            cover_simplices.append(simplex)
        sheet_map.append((2 * i, 2 * i + 1))

    cover = Triangulation.from_simplices(T.dim, cover_simplices, len(labels), name=f"cover({T.label})")
    cover_graph = nx.Graph()
    cover_graph.add_nodes_from(range(len(labels)))
    for simplex in cover.top_simplices:
        cover_graph.add_edges_from(itertools.combinations(simplex, 2))
    orientable = nx.number_connected_components(cover_graph) == 2
    logger.debug(f"Double cover of {T.label}: {len(labels)} vertices, orientable={orientable}")
    return DoubleCover(cover, orientable, tuple(sheet_map))


def _local_orientation(T: Triangulation, v: int, start: int, rng: Optional[random.Random]) -> Dict[int, int]:
    """Orientation bits on the star of v, propagated through faces containing v."""
    eps = {start: 0}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        neighbors = [(j, flip) for j, flip, face in T.dual[i] if v in face]
        if rng is not None:
            rng.shuffle(neighbors)
        for j, flip in neighbors:
            if j not in eps:
                eps[j] = eps[i] ^ flip
                queue.append(j)
    return eps


def _local_orientations(T: Triangulation, rng: Optional[random.Random]) -> List[Dict[int, int]]:
    result = []
    for v in range(T.vertex_count):
        star = T.vertex_star[v]
        start = rng.choice(star) if rng is not None else star[0]
        result.append(_local_orientation(T, v, start, rng))
    return result


def w1_cochain(T: Triangulation, rng: Optional[random.Random] = None) -> BitVector:
    """
    A 1-cocycle representing w1. Each edge uv takes the disagreement of the
    local orientations at u and v on one top simplex containing the edge.
    rng randomizes every reference choice; the cohomology class never changes.
    """
    require_valid(T)
    eps = _local_orientations(T, rng)
    values = []
    for u, w in T.faces(1):
        star = T.edge_star[(u, w)]
        t = rng.choice(star) if rng is not None else star[0]
        values.append(eps[u][t] ^ eps[w][t])
    return BitVector(values)


def edge_loops(T: Triangulation, z: BitVector) -> List[List[int]]:
    """Split a 1-cycle into closed vertex walks, always leaving along the smallest unused edge."""
    edges = T.faces(1)
    if z.length != len(edges):
        raise TriangulationError(f"1-chain has length {z.length}, triangulation has {len(edges)} edges")
    incident: Dict[int, List[int]] = defaultdict(list)
    for i in z.support():
        u, w = edges[i]
        incident[u].append(w)
        incident[w].append(u)
    odd = [v for v, nbrs in incident.items() if len(nbrs) % 2]
    if odd:
        raise TriangulationError(f"1-chain is not a cycle: vertex {min(odd)} has odd degree")

    remaining = {v: sorted(nbrs) for v, nbrs in incident.items()}
    loops = []
    while any(remaining.values()):
        start = min(v for v, nbrs in remaining.items() if nbrs)
        walk = [start]
        current = start
        while True:
            nxt = remaining[current].pop(0)
            remaining[nxt].remove(current)
            walk.append(nxt)
            current = nxt
            if current == start:
                break
        loops.append(walk)
    return loops


def w1_evaluate(T: Triangulation, z: BitVector, rng: Optional[random.Random] = None) -> int:
    """
    Transport a local orientation around each closed walk of the cycle.

    Each walk edge gets a top simplex containing it; at every vertex the
    orientation is carried from the incoming simplex to the outgoing one
    inside the vertex star. The walk contributes 1 when it comes back
    reversed.
    """
    require_valid(T)
    loops = edge_loops(T, z)
    total = 0
    for walk in loops:
        steps = list(zip(walk, walk[1:]))
        chosen = []
        for u, w in steps:
            star = T.edge_star[(min(u, w), max(u, w))]
            chosen.append(rng.choice(star) if rng is not None else star[0])
        for k, (_, w) in enumerate(steps):
            nxt = chosen[(k + 1) % len(chosen)]
            vertex = w
            start = rng.choice(T.vertex_star[vertex]) if rng is not None else T.vertex_star[vertex][0]
            eps = _local_orientation(T, vertex, start, rng)
            total ^= eps[chosen[k]] ^ eps[nxt]
    return total


def euler_characteristic(T: Triangulation) -> int:
    require_valid(T)
    return T.validation.euler_characteristic


def mapping_torus(F: Triangulation, phi: SimplicialAutomorphism, n: int = MIN_LAYERS, name: str = "") -> Triangulation:
    """
    F x [0, 1] in n prism layers with the top glued to the bottom through phi.

    Layer i holds vertices i*V + v. Over a triangle a < b < c the prism from
    layer i to i+1 splits as [a b c c'], [a b b' c'], [a a' b' c'].
    """
    if F.dim != 2:
        raise TriangulationError(f"mapping torus needs a surface, got dimension {F.dim}")
    require_valid(F)
    if n < MIN_LAYERS:
        raise TriangulationError(f"at least {MIN_LAYERS} layers are needed, got {n}")
    if phi.source != F:
        raise TriangulationError("automorphism acts on a different surface")

    V = F.vertex_count

    def vid(v: int, layer: int) -> int:
        if layer == n:
            return phi(v)
        return layer * V + v

    tets = []
    for layer in range(n):
        for a, b, c in F.top_simplices:
            a0, b0, c0 = vid(a, layer), vid(b, layer), vid(c, layer)
            a1, b1, c1 = vid(a, layer + 1), vid(b, layer + 1), vid(c, layer + 1)
            tets.append((a0, b0, c0, c1))
            tets.append((a0, b0, b1, c1))
            tets.append((a0, a1, b1, c1))
    T = Triangulation.from_simplices(3, tets, n * V, name=name or f"{F.label}~S1")
    require_valid(T)
    logger.debug(f"Mapping torus {T.label}: {T.vertex_count} vertices, {len(tets)} tetrahedra")
    return T


def product_with_circle(F: Triangulation, n: int = MIN_LAYERS, name: str = "") -> Triangulation:
    if F.dim != 2:
        raise TriangulationError(f"circle product needs a surface, got dimension {F.dim}")
    require_valid(F)
    return mapping_torus(F, SimplicialAutomorphism.identity(F), n, name=name or f"{F.label}xS1")


def sphere(dim: int) -> Triangulation:
    """Boundary of the (dim+1)-simplex"""
    return Triangulation.from_simplices(dim, itertools.combinations(range(dim + 2), dim + 1), dim + 2, name=f"S{dim}")


def octahedron() -> Triangulation:
    """Octahedral 2-sphere; antipodal vertices are v and v ^ 1"""
    triangles = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    return Triangulation.from_simplices(2, triangles, 6, name="S2")


def antipodal(S: Triangulation) -> SimplicialAutomorphism:
    return SimplicialAutomorphism(S, tuple(v ^ 1 for v in range(S.vertex_count)))


def projective_plane() -> Triangulation:
    """Six-vertex RP2"""
    triangles = [
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
        (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
    ]
    return Triangulation.from_simplices(2, triangles, 6, name="RP2")


def seven_vertex_torus() -> Triangulation:
    triangles = []
    for i in range(7):
        triangles.append((i, (i + 1) % 7, (i + 3) % 7))
        triangles.append((i, (i + 2) % 7, (i + 3) % 7))
    return Triangulation.from_simplices(2, triangles, 7, name="T2")


def grid_torus(m: int = 3) -> Triangulation:
    """Torus on the m x m grid Z/m x Z/m, vertex (x, y) numbered x + m*y."""
    if m < 3:
        raise TriangulationError(f"grid torus needs m >= 3, got {m}")

    def vid(x: int, y: int) -> int:
        return (x % m) + m * (y % m)

    triangles = []
    for x in range(m):
        for y in range(m):
            triangles.append((vid(x, y), vid(x + 1, y), vid(x + 1, y + 1)))
            triangles.append((vid(x, y), vid(x, y + 1), vid(x + 1, y + 1)))
    return Triangulation.from_simplices(2, triangles, m * m, name=f"T2grid{m}")


def swap_reflection(T: Triangulation) -> SimplicialAutomorphism:
    """The orientation-reversing reflection (x, y) -> (y, x) of a grid torus."""
    m = int(round(T.vertex_count ** 0.5))
    if m * m != T.vertex_count:
        raise TriangulationError(f"{T.label} is not a grid torus")
    return SimplicialAutomorphism(T, tuple((v // m) + m * (v % m) for v in range(T.vertex_count)))


def connected_sum(F1: Triangulation, F2: Triangulation, name: str = "") -> Triangulation:
    """
    Remove the first triangle of each surface and glue along the boundaries.

    The removed triangle of F2 is identified vertex by vertex (in sorted
    order) with the one of F1; the other vertices of F2 get fresh labels.
    """
    for F in (F1, F2):
        if F.dim != 2:
            raise TriangulationError(f"connected sum needs surfaces, got dimension {F.dim}")
        require_valid(F)
    removed1 = F1.top_simplices[0]
    removed2 = F2.top_simplices[0]
    relabel = dict(zip(removed2, removed1))
    fresh = itertools.count(F1.vertex_count)
    for v in range(F2.vertex_count):
        if v not in relabel:
            relabel[v] = next(fresh)
    triangles = list(F1.top_simplices[1:])
    triangles.extend(tuple(relabel[v] for v in t) for t in F2.top_simplices[1:])
    T = Triangulation.from_simplices(2, triangles, F1.vertex_count + F2.vertex_count - 3, name=name or f"{F1.label}#{F2.label}")
    require_valid(T)
    return T


SURFACES = ("S2", "RP2", "T2", "K2", "Sg2", "K2h2")
THREE_MANIFOLDS = ("S3", "S2xS1", "S2twS1", "RP2xS1", "KxS1", "T3")
CATALOG_NAMES = THREE_MANIFOLDS + SURFACES

KNOWN_ORIENTABLE = {
    "S3": True, "S2xS1": True, "S2twS1": False, "RP2xS1": False, "KxS1": False, "T3": True,
    "S2": True, "RP2": False, "T2": True, "K2": False, "Sg2": True, "K2h2": False,
}


@lru_cache(maxsize=None)
def catalog(name: str) -> Triangulation:
    """Built-in triangulation by name"""
    if name == "S3":
        return sphere(3)
    if name == "S2":
        return octahedron()
    if name == "RP2":
        return projective_plane()
    if name == "T2":
        return seven_vertex_torus()
    if name == "K2":
        return connected_sum(catalog("RP2"), catalog("RP2"), name="K2")
    if name == "Sg2":
        return connected_sum(catalog("T2"), catalog("T2"), name="Sg2")
    if name == "K2h2":
        return connected_sum(connected_sum(catalog("K2"), catalog("T2")), catalog("T2"), name="K2h2")
    if name == "S2xS1":
        return product_with_circle(catalog("S2"), name="S2xS1")
    if name == "S2twS1":
        S2 = catalog("S2")
        return mapping_torus(S2, antipodal(S2), name="S2twS1")
    if name == "RP2xS1":
        return product_with_circle(catalog("RP2"), name="RP2xS1")
    if name == "KxS1":
        return product_with_circle(catalog("K2"), name="KxS1")
    if name == "T3":
        return product_with_circle(catalog("T2"), name="T3")
    raise TriangulationError(f"unknown catalog manifold {name!r}; known: {', '.join(CATALOG_NAMES)}")
