"""
Piecewise-affine maps in the plane whose gradients realize a laminate.

A split t L + (1 - t) R with L - R = a (x) n becomes a sawtooth band pattern
orthogonal to n. Children are realized inside their bands at the finer scale
epsilon; near band edges the child sawtooth is capped by a multiple of the
distance to the edge so that the nested map matches the band's affine map
on its boundary. The cap creates thin transition pieces whose gradients are
not atoms of the laminate.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import shapely
from shapely.errors import GEOSException
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from orientlam.constants import (
    MAX_REALIZATION_DEPTH,
    RANK_ONE_TOLERANCE,
    TRANSITION_WIDTH_FACTOR,
    UNIT_NORMAL_TOLERANCE,
)
from orientlam.exceptions import (
    ConfigInvalidError,
    DepthExceededError,
    IncompatibleSplitError,
    NotUnitNormalError,
    RealizationError,
)
from orientlam.laminate import Laminate, Leaf, Node, Split
from orientlam.utils.matrix import det_zero_tolerance, determinants, frobenius_norm
from orientlam.utils.serialization import matrix_to_list, vector_to_list

logger = logging.getLogger(__name__)

MIN_PIECE_AREA = 1e-16
CONTACT_TOLERANCE = 1e-14
SAMPLE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MapPiece:
    """
    Convex polygon carrying the affine map x -> gradient @ x + offset.

    ``label`` is the leaf id of the atom the gradient realizes, or None on
    transition pieces.
    """

    vertices: np.ndarray
    gradient: np.ndarray
    offset: np.ndarray
    label: Optional[int] = None

    @property
    def area(self) -> float:
        return _area(self.vertices)

    def value(self, points: np.ndarray) -> np.ndarray:
        """Map values at points of shape (k, 2)."""
        return points @ self.gradient.T + self.offset

    def polygon(self) -> Polygon:
        return Polygon(self.vertices)


@dataclass(frozen=True, eq=False)
class SawtoothMap:
    """Nested band decomposition of the unit square in the frame of the top normal."""

    pieces: Tuple[MapPiece, ...]
    normal: np.ndarray
    depth: int
    epsilon: float
    periods: int
    atom_count: int

    @property
    def corners(self) -> np.ndarray:
        """Corners of the domain: 0, n, n + n_perp, n_perp (counter-clockwise)."""
        n = self.normal
        perp = np.array([-n[1], n[0]])
        return np.array([[0.0, 0.0], n, n + perp, perp])

    def to_point(self, s: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Point with frame coordinates (s, r)."""
        n = self.normal
        perp = np.array([-n[1], n[0]])
        return s[:, None] * n[None, :] + r[:, None] * perp[None, :]


@dataclass(frozen=True)
class HistogramBin:
    """Volume fraction of one gradient value."""

    weight: float
    matrix: np.ndarray = field(compare=False)
    label: Optional[int] = None


@dataclass(frozen=True)
class _Segment:
    """Interval of a sawtooth where h(s) = slope * s + intercept."""

    lo: float
    hi: float
    slope: float
    intercept: float
    left: bool


def _area(vertices: np.ndarray) -> float:
    if len(vertices) < 3:
        return 0.0
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def clip_half_plane(vertices: np.ndarray, q: np.ndarray, r: float) -> np.ndarray:
    """
    Clip a convex polygon to the half plane {x : q . x + r <= 0}.

    Sutherland-Hodgman step; orientation of the input is kept.
    """
    k = len(vertices)
    if k == 0:
        return vertices
    values = vertices @ q + r
    out: List[np.ndarray] = []
    for i in range(k):
        j = (i + 1) % k
        vi, vj = values[i], values[j]
        if vi <= 0.0:
            out.append(vertices[i])
        if (vi < 0.0 < vj) or (vj < 0.0 < vi):
            s = vi / (vi - vj)
            out.append(vertices[i] + s * (vertices[j] - vertices[i]))
    return np.array(out, dtype=float).reshape(-1, 2)


def convex_ring(vertices: np.ndarray) -> np.ndarray:
    """
    Counter-clockwise convex hull of a clipped piece, empty when it collapses.

    Clipping keeps pieces convex up to rounding; the hull removes the
    near-duplicate and collinear vertices that make a ring self-intersect.
    """
    if len(vertices) < 3:
        return np.empty((0, 2))
    hull = shapely.convex_hull(shapely.multipoints(vertices))
    if not isinstance(hull, Polygon) or hull.area <= MIN_PIECE_AREA:
        return np.empty((0, 2))
    return np.asarray(orient(hull, 1.0).exterior.coords, dtype=float)[:-1]


def _clip_strip(vertices: np.ndarray, n: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return clip_half_plane(clip_half_plane(vertices, -n, lo), n, -hi)


def _inward_edges(vertices: np.ndarray) -> List[Tuple[np.ndarray, float]]:
    """(nu, c) per edge with nu . x + c the distance to the edge line, positive inside."""
    edges: List[Tuple[np.ndarray, float]] = []
    k = len(vertices)
    for i in range(k):
        p, q = vertices[i], vertices[(i + 1) % k]
        e = q - p
        length = math.hypot(e[0], e[1])
        if length <= 1e-15:
            continue
        nu = np.array([-e[1], e[0]]) / length
        edges.append((nu, -float(nu @ p)))
    return edges


def _min_width(vertices: np.ndarray) -> float:
    """Minimal width of a convex polygon (attained across an edge normal)."""
    widths = [float(np.max(vertices @ nu) + c) for nu, c in _inward_edges(vertices)]
    return min(widths) if widths else 0.0


def sawtooth_segments(s0: float, s1: float, t: float, period: float) -> List[_Segment]:
    """
    Linear pieces of the sawtooth on [s0, s1].

    h(s0) = 0; h rises with slope 1 - t over t * period and falls with
    slope -t over (1 - t) * period, so 0 <= h <= t (1 - t) period.
    """
    segments: List[_Segment] = []
    rise = t * period
    peak = t * (1.0 - t) * period
    k = 0
    while True:
        base = s0 + k * period
        if base >= s1:
            break
        top = base + rise
        segments.append(_Segment(base, min(top, s1), 1.0 - t, -(1.0 - t) * base, True))
        if top < s1:
            segments.append(
                _Segment(top, min(base + period, s1), -t, peak + t * top, False)
            )
        k += 1
    return segments


def split_normal(node: Split) -> Tuple[np.ndarray, np.ndarray]:
    """
    Amplitude vector a and unit normal n with left - right = a (x) n.

    The stored direction (a, b) is used when present; b must be a unit
    vector. Otherwise the pair is read off the SVD of left - right.

    Raises:
        NotUnitNormalError: If the stored b is not of unit length
        IncompatibleSplitError: If left - right is not rank-one
    """
    jump = node.left.matrix - node.right.matrix
    scale = 1.0 + frobenius_norm(node.left.matrix) + frobenius_norm(node.right.matrix)
    if node.direction is not None and node.amplitudes is not None:
        a, b = node.direction
        if abs(float(np.linalg.norm(b)) - 1.0) > UNIT_NORMAL_TOLERANCE:
            logger.error(f"Split normal has length {float(np.linalg.norm(b))!r}")
            raise NotUnitNormalError("Split direction b must have unit length")
        amplitude = (node.amplitudes[0] - node.amplitudes[1]) * np.asarray(a, dtype=float)
        normal = np.asarray(b, dtype=float)
    else:
        u, s, vt = np.linalg.svd(jump)
        amplitude = s[0] * u[:, 0]
        normal = vt[0]
        if normal[int(np.argmax(np.abs(normal)))] < 0.0:
            amplitude, normal = -amplitude, -normal
    if frobenius_norm(jump - np.outer(amplitude, normal)) > RANK_ONE_TOLERANCE * scale:
        raise IncompatibleSplitError("Split children do not differ by a rank-one matrix")
    return amplitude, normal


class _Builder:
    """Accumulates pieces while walking the laminate tree."""

    def __init__(self, lam: Laminate, epsilon: float) -> None:
        self.epsilon = epsilon
        self.leaf_ids: Dict[int, int] = {id(leaf): i for i, leaf in enumerate(lam.leaves())}
        self.pieces: List[MapPiece] = []

    def emit(
        self, vertices: np.ndarray, gradient: np.ndarray, offset: np.ndarray, node: Optional[Node]
    ) -> None:
        vertices = convex_ring(vertices)
        if len(vertices) == 0:
            return
        if isinstance(node, Split):
            self.nested(vertices, gradient, offset, node)
            return
        label = None if node is None else self.leaf_ids[id(node)]
        self.pieces.append(MapPiece(vertices, gradient, offset, label))

    def top(self, square: np.ndarray, node: Split, periods: int) -> None:
        """Full sawtooth on the domain; the map is free on the outer boundary."""
        a, n = split_normal(node)
        for seg in sawtooth_segments(0.0, 1.0, node.t, 1.0 / periods):
            band = _clip_strip(square, n, seg.lo, seg.hi)
            if _area(band) <= MIN_PIECE_AREA:
                continue
            child = node.left if seg.left else node.right
            self.emit(band, node.matrix + seg.slope * np.outer(a, n), seg.intercept * a, child)

    def nested(
        self, region: np.ndarray, gradient: np.ndarray, offset: np.ndarray, node: Split
    ) -> None:
        """
        Realize ``node`` inside a convex region carrying x -> gradient @ x + offset.

        The perturbation a * min(h(n . x), lam * dist(x, edge)) vanishes on the
        region boundary.
        """
        a, n = split_normal(node)
        proj = region @ n
        s0, s1 = float(np.min(proj)), float(np.max(proj))
        period = self.epsilon * (s1 - s0)
        peak = node.t * (1.0 - node.t) * period
        transition = TRANSITION_WIDTH_FACTOR * self.epsilon * _min_width(region)
        if period <= 0.0 or transition <= 0.0:
            self.pieces.append(MapPiece(region, gradient, offset, None))
            return
        lam = peak / transition
        edges = [(lam * nu, lam * c) for nu, c in _inward_edges(region)]

        for seg in sawtooth_segments(s0, s1, node.t, period):
            strip = _clip_strip(region, n, seg.lo, seg.hi)
            if _area(strip) <= MIN_PIECE_AREA:
                continue
            candidates: List[Tuple[np.ndarray, float, bool]] = [
                (seg.slope * n, seg.intercept, True)
            ]
            for q, c in edges:
                if float(np.min(strip @ q)) + c < peak:
                    candidates.append((q, c, False))
            for k, (q_k, c_k, is_tooth) in enumerate(candidates):
                piece = strip
                for m, (q_m, c_m, _) in enumerate(candidates):
                    if m != k:
                        piece = clip_half_plane(piece, q_k - q_m, c_k - c_m)
                if _area(piece) <= MIN_PIECE_AREA:
                    continue
                child: Optional[Node] = None
                if is_tooth:
                    child = node.left if seg.left else node.right
                self.emit(piece, gradient + np.outer(a, q_k), offset + c_k * a, child)


def realize_laminate(
    lam: Laminate,
    depth_cap: int = 2,
    epsilon: float = 0.05,
    periods: int = 8,
) -> SawtoothMap:
    """
    Build a continuous piecewise-affine map whose gradients realize ``lam``.

    Args:
        lam: Planar laminate (d = 2)
        depth_cap: Maximal tree depth accepted, at most 3
        epsilon: Scale ratio between nesting levels, in (0, 1/4)
        periods: Number of top-level periods across the domain

    Returns:
        SawtoothMap over the unit square in the frame of the top normal

    Raises:
        RealizationError: If d != 2 or a realized piece is not a valid polygon
        DepthExceededError: If the tree is deeper than depth_cap or depth_cap > 3
        NotUnitNormalError: If a stored split normal is not a unit vector
        IncompatibleSplitError: If a node is not a rank-one split
    """
    if lam.d != 2:
        raise RealizationError(f"Realization is planar only, got d={lam.d}")
    if not 0.0 < epsilon < 0.25:
        raise ConfigInvalidError("epsilon must lie in (0, 1/4)", field="epsilon")
    if periods < 1:
        raise ConfigInvalidError("periods must be positive", field="periods")
    if depth_cap > MAX_REALIZATION_DEPTH:
        raise DepthExceededError(f"Depth cap {depth_cap} exceeds {MAX_REALIZATION_DEPTH}")
    depth = lam.depth()
    if depth > depth_cap:
        logger.error(f"Laminate depth {depth} exceeds cap {depth_cap}")
        raise DepthExceededError(f"Laminate depth {depth} exceeds cap {depth_cap}")

    builder = _Builder(lam, epsilon)
    tree = lam.tree
    if isinstance(tree, Leaf):
        normal = np.array([1.0, 0.0])
        square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        builder.emit(square, tree.matrix.copy(), np.zeros(2), tree)
    else:
        _, normal = split_normal(tree)
        perp = np.array([-normal[1], normal[0]])
        square = np.array([[0.0, 0.0], normal, normal + perp, perp])
        builder.top(square, tree, periods)

    invalid = int(np.sum(~shapely.is_valid([piece.polygon() for piece in builder.pieces])))
    if invalid:
        logger.error(f"{invalid} of {len(builder.pieces)} realized pieces are invalid polygons")
        raise RealizationError(f"{invalid} realized pieces are not valid polygons")

    logger.debug(f"Realized depth-{depth} laminate with {len(builder.pieces)} pieces")
    return SawtoothMap(
        pieces=tuple(builder.pieces),
        normal=np.asarray(normal, dtype=float),
        depth=depth,
        epsilon=float(epsilon),
        periods=int(periods),
        atom_count=len(builder.leaf_ids),
    )


def gradient_histogram(smap: SawtoothMap) -> List[HistogramBin]:
    """
    Volume fractions of the map's gradient values.

    Atom pieces are grouped by leaf id, in id order; transition pieces are
    grouped by their exact gradient, in order of appearance.
    """
    areas = shapely.area([piece.polygon() for piece in smap.pieces])
    atoms: Dict[int, List[float]] = {}
    atom_matrix: Dict[int, np.ndarray] = {}
    transitions: Dict[bytes, List[float]] = {}
    transition_matrix: Dict[bytes, np.ndarray] = {}
    for piece, area in zip(smap.pieces, areas):
        if piece.label is not None:
            atoms.setdefault(piece.label, []).append(float(area))
            atom_matrix.setdefault(piece.label, piece.gradient)
        else:
            key = piece.gradient.tobytes()
            transitions.setdefault(key, []).append(float(area))
            transition_matrix.setdefault(key, piece.gradient)
    bins = [
        HistogramBin(float(np.sum(atoms[k])), atom_matrix[k], k) for k in sorted(atoms)
    ]
    bins.extend(
        HistogramBin(float(np.sum(v)), transition_matrix[key], None)
        for key, v in transitions.items()
    )
    return bins


def histogram_tv(smap: SawtoothMap, lam: Laminate) -> float:
    """Total-variation distance between the gradient histogram and the atom weights."""
    weights = lam.atoms.weights
    realized = np.zeros(len(weights))
    stray = 0.0
    for b in gradient_histogram(smap):
        if b.label is None:
            stray += b.weight
        else:
            realized[b.label] += b.weight
    return 0.5 * (float(np.sum(np.abs(realized - weights))) + stray)


def negative_fraction(smap: SawtoothMap) -> float:
    """Volume where the realized map has negative Jacobian."""
    gradients = np.array([piece.gradient for piece in smap.pieces])
    dets = determinants(gradients)
    areas = shapely.area([piece.polygon() for piece in smap.pieces])
    return float(np.sum(areas[dets < -det_zero_tolerance(gradients)]))


def overlap_defect(smap: SawtoothMap) -> float:
    """
    |sum of piece areas - area of their union|; zero for a tiling.

    Raises:
        RealizationError: If the pieces cannot be unioned
    """
    polygons = [piece.polygon() for piece in smap.pieces]
    try:
        union = shapely.unary_union(polygons)
    except GEOSException as e:
        raise RealizationError(f"Cannot union the realized pieces: {e}") from e
    return abs(float(np.sum(shapely.area(polygons))) - union.area)


def continuity_residual(smap: SawtoothMap) -> float:
    """
    Largest jump of the map across piece boundaries.

    Every vertex of every piece is evaluated in each piece touching it.
    """
    polygons = [piece.polygon() for piece in smap.pieces]
    tree = shapely.STRtree(polygons)
    owner = np.concatenate(
        [np.full(len(piece.vertices), i) for i, piece in enumerate(smap.pieces)]
    )
    vertices = np.concatenate([piece.vertices for piece in smap.pieces])
    hits = tree.query(
        shapely.points(vertices), predicate="dwithin", distance=CONTACT_TOLERANCE
    )
    worst = 0.0
    for v, other in zip(hits[0], hits[1]):
        mine = owner[v]
        if mine == other:
            continue
        x = vertices[v : v + 1]
        jump = smap.pieces[mine].value(x) - smap.pieces[other].value(x)
        worst = max(worst, float(np.max(np.abs(jump))))
    return worst


def locate(smap: SawtoothMap, points: np.ndarray) -> np.ndarray:
    """
    Index of a piece containing each point (lowest index on shared boundaries).

    Raises:
        RealizationError: If a point lies outside the domain
    """
    tree = shapely.STRtree([piece.polygon() for piece in smap.pieces])
    hits = tree.query(shapely.points(points), predicate="dwithin", distance=SAMPLE_TOLERANCE)
    index = np.full(len(points), -1)
    for p, piece in zip(hits[0], hits[1]):
        if index[p] < 0 or piece < index[p]:
            index[p] = piece
    if np.any(index < 0):
        raise RealizationError("Sample point outside the realized domain")
    return index


def sample_grid(smap: SawtoothMap, size: int) -> Tuple[Tuple[str, ...], List[Tuple[Any, ...]]]:
    """
    Map values and gradients at the size x size cell centers of the domain.

    Returns:
        CSV header (x, y, u1, u2, g11, g12, g21, g22) and rows in row-major order
    """
    if size < 2:
        raise ConfigInvalidError("grid size must be at least 2", field="grid_size")
    coords = (np.arange(size) + 0.5) / size
    s, r = np.meshgrid(coords, coords, indexing="ij")
    points = smap.to_point(s.ravel(), r.ravel())
    owners = locate(smap, points)
    rows: List[Tuple[Any, ...]] = []
    for x, k in zip(points, owners):
        piece = smap.pieces[k]
        u = piece.value(x[None, :])[0]
        g = piece.gradient
        rows.append((x[0], x[1], u[0], u[1], g[0, 0], g[0, 1], g[1, 0], g[1, 1]))
    return ("x", "y", "u1", "u2", "g11", "g12", "g21", "g22"), rows


def map_to_dict(smap: SawtoothMap) -> Dict[str, Any]:
    """JSON document of a realized map."""
    return {
        "d": 2,
        "normal": vector_to_list(smap.normal),
        "depth": smap.depth,
        "epsilon": smap.epsilon,
        "periods": smap.periods,
        "atoms": smap.atom_count,
        "pieces": [
            {
                "vertices": [vector_to_list(v) for v in piece.vertices],
                "gradient": matrix_to_list(piece.gradient),
                "offset": vector_to_list(piece.offset),
                "label": piece.label,
            }
            for piece in smap.pieces
        ],
    }


def tv_bound(epsilon: float, depth: int) -> float:
    """Histogram fidelity bound 2 * epsilon * depth."""
    return 2.0 * epsilon * depth


def realization_summary(smap: SawtoothMap, lam: Laminate) -> Dict[str, float]:
    """Fidelity figures of a realization against its laminate."""
    atoms = lam.atoms
    dets = determinants(atoms.matrices)
    return {
        "pieces": float(len(smap.pieces)),
        "tv": histogram_tv(smap, lam),
        "tv_bound": tv_bound(smap.epsilon, max(smap.depth, 1)),
        "continuity": continuity_residual(smap),
        "overlap": overlap_defect(smap),
        "negative_fraction": negative_fraction(smap),
        "laminate_negative_mass": float(
            np.sum(atoms.weights[dets < -det_zero_tolerance(atoms.matrices)])
        ),
    }
