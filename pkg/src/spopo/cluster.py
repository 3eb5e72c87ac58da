"""Cluster states from squeezed supermodes.

A graph with adjacency ``V`` is realized by any passive network ``U = X + iY``
with ``Y = V X`` acting on ``p``-squeezed inputs.  All such networks are
``U0 O`` for one particular ``U0`` and a real orthogonal ``O``; the choice of
``O`` matters for finite squeezing and is optimized here with a
self-adaptive evolution strategy.

Mode operators are ``a = x + i p``, so a network ``U`` maps quadratures with
``[[Re U, -Im U], [Im U, Re U]]``.
"""

import json
import re
import warnings
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, NoImprovementWarning, UnknownGraph, WrongAngleCount
from .gaussian import as_covariance, extract_submatrix, n_modes, unitary_to_symplectic


@dataclass(frozen=True)
class ClusterGraph:
    name: str
    adjacency: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.adjacency, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got {V.shape}")
        if not np.allclose(V, V.T, atol=1e-12):
            raise DimensionMismatch("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", V)

    @property
    def n_nodes(self):
        return self.adjacency.shape[0]

    @property
    def edges(self):
        """1-based edge list ``[(i, j), ...]`` with ``i < j``."""
        V = self.adjacency
        return [(i + 1, j + 1) for i, j in combinations(range(self.n_nodes), 2) if V[i, j] != 0]

    def permuted(self, perm):
        """Graph with node ``k`` relabeled to ``perm[k]``."""
        perm = np.asarray(perm)
        P = np.eye(self.n_nodes)[perm]
        return ClusterGraph(f"{self.name}-permuted", P.T @ self.adjacency @ P)

    def to_dict(self):
        doc = {"name": self.name, "n": self.n_nodes, "edges": [list(e) for e in self.edges]}
        weights = [float(self.adjacency[i - 1, j - 1]) for i, j in self.edges]
        if any(w != 1.0 for w in weights):
            doc["weights"] = weights
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            n = int(doc["n"])
            edges = doc["edges"]
        except KeyError as exc:
            raise DimensionMismatch(f"graph document lacks field {exc.args[0]!r}") from None
        weights = doc.get("weights") or [1.0] * len(edges)
        if len(weights) != len(edges):
            raise DimensionMismatch("weights and edges differ in length")
        return graph_from_edges(doc.get("name", "custom"), n, edges, weights)


def graph_from_edges(name, n, edges, weights=None):
    """Adjacency from a 1-based edge list."""
    V = np.zeros((n, n))
    weights = [1.0] * len(edges) if weights is None else weights
    for (i, j), w in zip(edges, weights):
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise DimensionMismatch(f"bad edge ({i}, {j}) for {n} nodes")
        V[i - 1, j - 1] = V[j - 1, i - 1] = float(w)
    return ClusterGraph(name, V)


def _cycle(nodes):
    return [(a, b) for a, b in zip(nodes, nodes[1:] + nodes[:1])]


_HEXAGON = _cycle([1, 2, 3, 4, 5, 6])
_DOUBLE_SQUARE = [(1, 2), (2, 4), (4, 3), (3, 1), (3, 5), (5, 6), (6, 4)]

_LIBRARY = {
    "square4": (4, _cycle([1, 2, 3, 4])),
    "T4": (4, [(1, 2), (1, 3), (1, 4)]),
    "hexagon": (6, _HEXAGON),
    "connected_hexagon": (6, _HEXAGON + [(1, 4), (2, 5), (3, 6)]),
    "maximally_connected_hexagon": (6, list(combinations(range(1, 7), 2))),
    "prism": (6, _cycle([1, 2, 3]) + _cycle([4, 5, 6]) + [(1, 4), (2, 5), (3, 6)]),
    "connected_square_pyramid": (
        6,
        _cycle([2, 3, 4, 5]) + [(1, k) for k in (2, 3, 4, 5)] + [(6, k) for k in (2, 3, 4, 5)] + [(1, 6)],
    ),
    "double_square": (6, _DOUBLE_SQUARE),
    "connected_double_square": (6, _DOUBLE_SQUARE + [(1, 6), (2, 5)]),
    "pentagonal_pyramid": (6, _cycle([1, 2, 3, 4, 5]) + [(6, k) for k in range(1, 6)]),
}

TABLE_GRAPHS = (
    "linear6",
    "hexagon",
    "connected_hexagon",
    "maximally_connected_hexagon",
    "prism",
    "connected_square_pyramid",
    "double_square",
    "connected_double_square",
    "pentagonal_pyramid",
)


def graph_names():
    return ["linear4", "square4", "T4", "linear6"] + [k for k in _LIBRARY if k not in ("square4", "T4")]


def graph_library(name):
    """Named graph.  ``linearN`` and ``emptyN`` work for any ``N >= 1``."""
    m = re.fullmatch(r"(linear|empty)(\d+)", name)
    if m:
        n = int(m.group(2))
        if n < 1:
            raise UnknownGraph(f"graph {name!r} needs at least one node")
        edges = [(k, k + 1) for k in range(1, n)] if m.group(1) == "linear" else []
        return graph_from_edges(name, n, edges)
    if name not in _LIBRARY:
        raise UnknownGraph(f"unknown graph {name!r}; known: {', '.join(graph_names())}")
    n, edges = _LIBRARY[name]
    return graph_from_edges(name, n, edges)


def load_graph(path_or_name):
    """Graph from a JSON file, or from the library when given a known name."""
    if isinstance(path_or_name, str) and not path_or_name.endswith(".json"):
        return graph_library(path_or_name)
    with open(path_or_name) as fh:
        return ClusterGraph.from_dict(json.load(fh))


# --- networks ----------------------------------------------------------------


@dataclass(frozen=True)
class UnitaryNetwork:
    unitary: np.ndarray

    @property
    def X(self):
        return self.unitary.real

    @property
    def Y(self):
        return self.unitary.imag

    def closure_defect(self, adjacency):
        """``max |Y - V X|``; zero for a network realizing ``adjacency``."""
        return float(np.max(np.abs(self.Y - np.asarray(adjacency) @ self.X)))


def _graph_matrix(graph):
    return graph.adjacency if isinstance(graph, ClusterGraph) else np.asarray(graph, dtype=float)


def canonical_unitary(graph):
    """``U0 = (I + iV)(I + V^2)^(-1/2)``, unitary with ``Im U0 = V Re U0``."""
    V = _graph_matrix(graph)
    n = V.shape[0]
    w, Q = np.linalg.eigh(np.eye(n) + V @ V)
    inv_sqrt = (Q / np.sqrt(w)) @ Q.T
    return UnitaryNetwork((np.eye(n) + 1j * V) @ inv_sqrt)


def n_angles(n):
    return n * (n - 1) // 2


@dataclass(frozen=True)
class AngleVector:
    """Givens angles over the pairs ``(i, j), i < j`` plus a reflection flag."""

    theta: np.ndarray
    reflection: bool = False

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angles(np.asarray(self.theta, dtype=float)))

    def to_dict(self):
        return {"theta": self.theta.tolist(), "reflection": bool(self.reflection)}


def wrap_angles(theta):
    """Map angles to ``(-pi, pi]``."""
    out = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def _givens_batch(theta, n, reflection):
    """Orthogonal matrices for a batch of angle vectors, shape ``(B, n, n)``."""
    B = theta.shape[0]
    O = np.broadcast_to(np.eye(n), (B, n, n)).copy()
    for k, (i, j) in enumerate(combinations(range(n), 2)):
        c, s = np.cos(theta[:, k])[:, None], np.sin(theta[:, k])[:, None]
        oi, oj = O[:, :, i].copy(), O[:, :, j]
        O[:, :, i] = c * oi + s * oj
        O[:, :, j] = -s * oi + c * oj
    if np.ndim(reflection) == 0:
        reflection = np.full(B, bool(reflection))
    O[np.asarray(reflection), :, -1] *= -1
    return O


def orthogonal_from_angles(angles, n=None):
    """Product of Givens rotations ``G_12 G_13 ... G_(n-1)n``.

    ``G_ij(t)`` rotates the ``(i, j)`` plane with ``[[c, -s], [s, c]]``.
    The reflection flag negates the last column.
    """
    if not isinstance(angles, AngleVector):
        angles = AngleVector(np.asarray(angles, dtype=float))
    theta = angles.theta
    if n is None:
        n = int(round((1 + np.sqrt(1 + 8 * theta.size)) / 2))
    if theta.size != n_angles(n):
        raise WrongAngleCount(f"{n} modes need {n_angles(n)} angles, got {theta.size}")
    return _givens_batch(theta[None, :], n, angles.reflection)[0]


def delta_sqz(pattern):
    """Phase matrix turning ``x``-squeezed modes into ``p``-squeezed ones."""
    return np.diag([1j if q == "x" else 1.0 + 0j for q in pattern])


# --- nullifiers ----------------------------------------------------------------


def nullifier_coefficients(graph):
    """Rows ``c_i`` with ``delta_i = c_i . (x, p)``: ``-V_i`` on ``x``, ``e_i`` on ``p``."""
    V = _graph_matrix(graph)
    return np.hstack([-V, np.eye(V.shape[0])])


@dataclass(frozen=True)
class NullifierReport:
    variances: np.ndarray  # normalized to the vacuum baseline
    raw: np.ndarray
    baseline: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.variances < 1.0))

    @property
    def mean(self):
        return float(np.mean(self.variances))

    @property
    def max(self):
        return float(np.max(self.variances))

    def to_dict(self):
        return {
            "nullifiers": self.variances.tolist(),
            "raw": self.raw.tolist(),
            "shot_noise": self.baseline.tolist(),
            "mean": self.mean,
            "max": self.max,
            "pass": self.passed,
        }


def nullifier_variances(cov_cluster, graph):
    """Variances of ``p_i - sum_j V_ij x_j`` relative to a vacuum input."""
    V = _graph_matrix(graph)
    cov = as_covariance(cov_cluster)
    if n_modes(cov) != V.shape[0]:
        raise DimensionMismatch(f"{n_modes(cov)}-mode state for a {V.shape[0]}-node graph")
    C = nullifier_coefficients(V)
    raw = np.einsum("ik,kl,il->i", C, cov, C)
    base = 1.0 + np.sum(V**2, axis=1)
    return NullifierReport(raw / base, raw, base)


def total_unitary(U_V, pattern, U_T):
    """``U_V Delta U_T^-1`` on the first ``n`` supermodes, identity elsewhere.

    ``U_T`` is the real orthogonal pixel-to-supermode matrix whose columns
    are the supermodes.
    """
    U_V = np.asarray(U_V.unitary if isinstance(U_V, UnitaryNetwork) else U_V, dtype=complex)
    U_T = np.asarray(U_T, dtype=float)
    N, n = U_T.shape[0], U_V.shape[0]
    if U_T.shape != (N, N) or n > N or len(pattern) != n:
        raise DimensionMismatch("network, pattern and mode basis sizes disagree")
    inner = np.eye(N, dtype=complex)
    inner[:n, :n] = U_V @ delta_sqz(pattern)
    return inner @ U_T.T


def build_cluster_covariance(cov_pix, U_T, pattern, U_V):
    """Covariance of the cluster nodes (the first ``n`` output modes) and ``U_tot``."""
    U_tot = total_unitary(U_V, pattern, U_T)
    S = unitary_to_symplectic(U_tot)
    out = S @ as_covariance(cov_pix) @ S.T
    out = 0.5 * (out + out.T)
    n = len(pattern)
    return extract_submatrix(out, range(n)), U_tot


# --- optimizer -----------------------------------------------------------------


@dataclass(frozen=True)
class ESConfig:
    """Settings of the (mu, lambda) evolution strategy."""

    seed: int = 0
    mu: int = 5
    lam: int = 30
    sigma0: float = 0.3
    max_generations: int = 2000
    stagnation: int = 200
    max_restarts: int = 5
    objective: str = "mean"
    reflections: tuple = (False, True)
    min_improvement: float = 1e-12

    def to_dict(self):
        doc = asdict(self)
        doc["reflections"] = list(self.reflections)
        return doc

    @classmethod
    def from_dict(cls, doc):
        known = {k: v for k, v in doc.items() if k in cls.__dataclass_fields__}
        if "reflections" in known:
            known["reflections"] = tuple(bool(r) for r in known["reflections"])
        if known.get("objective", "mean") not in ("mean", "max"):
            raise ValueError("objective must be 'mean' or 'max'")
        if "population" in doc:
            known["lam"] = int(doc["population"])
        if "generations" in doc:
            known["max_generations"] = int(doc["generations"])
        return cls(**known)


def select_supermodes(cov_supermodes, n):
    """Indices and quadratures of the ``n`` most squeezed modes (ties by index)."""
    cov = as_covariance(cov_supermodes)
    N = n_modes(cov)
    if n > N:
        raise DimensionMismatch(f"graph has {n} nodes but only {N} supermodes are available")
    d = np.diag(cov)
    vx, vp = d[:N], d[N:]
    sq = np.minimum(vx, vp)
    order = sorted(range(N), key=lambda k: (sq[k], k))[:n]
    order.sort()
    return order, ["x" if vx[k] <= vp[k] else "p" for k in order]


class _Objective:
    """Batched nullifier variances for networks ``U0 O`` on fixed inputs."""

    def __init__(self, cov_inputs, V, kind):
        self.V = V
        self.n = V.shape[0]
        self.U0 = canonical_unitary(V).unitary
        self.cov = cov_inputs
        self.C = nullifier_coefficients(V)
        self.base = 1.0 + np.sum(V**2, axis=1)
        self.kind = kind

    def variances(self, O):
        U = self.U0[None] @ O
        X, Y = U.real, U.imag
        S = np.concatenate([np.concatenate([X, -Y], axis=2), np.concatenate([Y, X], axis=2)], axis=1)
        R = self.C[None] @ S  # nullifier rows in input coordinates
        raw = np.einsum("bik,kl,bil->bi", R, self.cov, R)
        return raw / self.base

    def __call__(self, O):
        d = self.variances(O)
        return d.mean(axis=1) if self.kind == "mean" else d.max(axis=1)


@dataclass
class ESTrace:
    best_per_generation: list = field(default_factory=list)
    restarts: int = 0
    generations: int = 0


def _evolve(objective, n, reflection, config, rng, trace):
    """One full ES search (with restarts) at a fixed reflection flag."""
    dim = n_angles(n)
    best_val, best_theta = np.inf, np.zeros(dim)
    if dim == 0:
        val = objective(_givens_batch(np.zeros((1, 0)), n, reflection))[0]
        return float(val), best_theta
    tau_g = 1.0 / np.sqrt(2.0 * dim)
    tau_i = 1.0 / np.sqrt(2.0 * np.sqrt(dim))
    for restart in range(config.max_restarts + 1):
        if restart == 0:
            parents = np.zeros((config.mu, dim))
        else:
            parents = rng.uniform(-np.pi, np.pi, size=(config.mu, dim))
            trace.restarts += 1
        sigmas = np.full((config.mu, dim), config.sigma0)
        run_best, stale = np.inf, 0
        for _ in range(config.max_generations):
            pick = rng.integers(config.mu, size=config.lam)
            glob = rng.standard_normal((config.lam, 1))
            sig = sigmas[pick] * np.exp(tau_g * glob + tau_i * rng.standard_normal((config.lam, dim)))
            sig = np.clip(sig, 1e-12, np.pi)
            kids = wrap_angles(parents[pick] + sig * rng.standard_normal((config.lam, dim)))
            vals = objective(_givens_batch(kids, n, reflection))
            order = np.argsort(vals, kind="stable")[: config.mu]
            parents, sigmas = kids[order], sig[order]
            trace.generations += 1
            gen_best = float(vals[order[0]])
            trace.best_per_generation.append(min(gen_best, best_val))
            if gen_best < best_val:
                best_val, best_theta = gen_best, kids[order[0]].copy()
            if gen_best < run_best - config.min_improvement:
                run_best, stale = gen_best, 0
            else:
                stale += 1
                if stale >= config.stagnation:
                    break
    return best_val, best_theta


@dataclass(frozen=True)
class ClusterResult:
    graph: ClusterGraph
    angles: AngleVector
    network: UnitaryNetwork
    report: NullifierReport
    objective: float
    objective_kind: str
    selected_modes: list
    pattern: list
    cov_cluster: np.ndarray
    generations: int
    restarts: int

    def to_dict(self):
        return {
            "graph": self.graph.to_dict(),
            "objective": self.objective_kind,
            "objective_value": self.objective,
            "selected_modes": [int(k) + 1 for k in self.selected_modes],
            "pattern": list(self.pattern),
            "angles": self.angles.to_dict(),
            "report": self.report.to_dict(),
            "generations": self.generations,
            "restarts": self.restarts,
        }


def optimize_cluster_basis(cov_supermodes, graph, config=None):
    """Search the orthogonal freedom of the cluster network.

    Args:
        cov_supermodes: covariance in the supermode basis; the ``n`` most
            squeezed modes feed the ``n``-node graph.
        graph (ClusterGraph): target graph.
        config (ESConfig): optimizer settings, including the seed.

    Returns:
        ClusterResult: best angles, network ``U_V = U0 O``, nullifiers of the
        resulting state and the search statistics.

    Emits :class:`NoImprovementWarning` when the best objective is not below 1.
    """
    config = config or ESConfig()
    if config.objective not in ("mean", "max"):
        raise ValueError("objective must be 'mean' or 'max'")
    V = _graph_matrix(graph)
    graph = graph if isinstance(graph, ClusterGraph) else ClusterGraph("custom", V)
    n = V.shape[0]
    modes, pattern = select_supermodes(cov_supermodes, n)
    sub = extract_submatrix(as_covariance(cov_supermodes), modes)
    S_delta = unitary_to_symplectic(delta_sqz(pattern))
    inputs = S_delta @ sub @ S_delta.T
    objective = _Objective(inputs, V, config.objective)

    rng = np.random.default_rng(config.seed)
    trace = ESTrace()
    best = (np.inf, None, None)
    for refl in config.reflections:
        val, theta = _evolve(objective, n, refl, config, rng, trace)
        if val < best[0]:
            best = (val, theta, refl)
    val, theta, refl = best
    angles = AngleVector(theta, bool(refl))
    O = orthogonal_from_angles(angles, n)
    network = UnitaryNetwork(canonical_unitary(V).unitary @ O)
    S = unitary_to_symplectic(network.unitary)
    cov_c = S @ inputs @ S.T
    report = nullifier_variances(0.5 * (cov_c + cov_c.T), V)
    final = report.mean if config.objective == "mean" else report.max
    if final >= 1.0:
        warnings.warn(f"best {config.objective} nullifier {final:.4f} is not below shot noise", NoImprovementWarning)
    return ClusterResult(
        graph, angles, network, report, final, config.objective, modes, pattern, cov_c, trace.generations, trace.restarts
    )
