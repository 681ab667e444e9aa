"""Pairwise factor view of the word CRF, TRW-S minimisation and an exact oracle.

TRW-S follows Kolmogorov's sequential schedule: variables are visited in a
fixed order, each node's reparameterised unary is split evenly over the
monotonic chains through it, and messages are sent forward, then backward.
The reported lower bound is evaluated exactly on an explicit chain
decomposition of the current reparameterisation, so it is always valid.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .energy import EnergyModel, Labeling
from . import _kernels
from .graph import NGramIndex

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-6
DEFAULT_DOMAIN_CAP = 200_000
BRUTE_FORCE_LIMIT = 10**7


class DomainOverflowError(ValueError):
    pass


class InstanceTooLargeError(ValueError):
    pass


class DenseEdge:
    """Pairwise term stored as a full ``K_a x K_b`` matrix."""

    def __init__(self, a: int, b: int, table: np.ndarray):
        self.a, self.b = a, b
        self.table = np.asarray(table, dtype=float)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.table.shape

    def min_over_a(self, h: np.ndarray) -> np.ndarray:
        return (h[:, None] + self.table).min(axis=0)

    def min_over_b(self, h: np.ndarray) -> np.ndarray:
        return (self.table + h[None, :]).min(axis=1)

    def cost(self, xa: int, xb: int) -> float:
        return float(self.table[xa, xb])

    def row(self, xa: int) -> np.ndarray:
        return self.table[xa]

    def col(self, xb: int) -> np.ndarray:
        return self.table[:, xb]

    def dense(self) -> np.ndarray:
        return self.table

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.table)))


class AgreementEdge:
    """Character node ``a`` against auxiliary node ``b``.

    The cost is zero when the character takes epsilon, when the aux label is
    the invalid one (``codes == -1``) or when ``codes[y]`` equals the
    character label; otherwise it is ``penalty``. Messages cost O(K_a + K_b)
    instead of O(K_a * K_b).
    """

    def __init__(self, a: int, b: int, codes: np.ndarray, n_char: int, eps: int, penalty: float):
        self.a, self.b = a, b
        self.codes = np.asarray(codes, dtype=np.int64)
        self.n_char = n_char
        self.eps = eps
        self.penalty = float(penalty)

    # grouping tables are built on first use; the block path never needs them
    @cached_property
    def _invalid(self) -> np.ndarray:
        return np.flatnonzero(self.codes < 0)

    @cached_property
    def _clipped(self) -> np.ndarray:
        return np.where(self.codes >= 0, self.codes, 0)

    @cached_property
    def _grouping(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        valid = np.flatnonzero(self.codes >= 0)
        order = valid[np.argsort(self.codes[valid], kind="stable")]
        groups, starts = np.unique(self.codes[order], return_index=True)
        return order, groups, starts

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_char, len(self.codes)

    def min_over_a(self, h: np.ndarray) -> np.ndarray:
        lo = h.min()
        base = min(h[self.eps], lo + self.penalty)
        out = np.minimum(h[self._clipped], base)
        out[self._invalid] = lo
        return out

    def min_over_b(self, g: np.ndarray) -> np.ndarray:
        lo = g.min()
        base = lo + self.penalty
        if len(self._invalid):
            base = min(base, g[self._invalid].min())
        out = np.full(self.n_char, base)
        order, groups, starts = self._grouping
        if len(order):
            grouped = np.minimum.reduceat(g[order], starts)
            out[groups] = np.minimum(out[groups], grouped)
        out[self.eps] = lo
        return out

    def cost(self, xa: int, xb: int) -> float:
        c = self.codes[xb]
        if xa == self.eps or c < 0 or c == xa:
            return 0.0
        return self.penalty

    def row(self, xa: int) -> np.ndarray:
        if xa == self.eps:
            return np.zeros(len(self.codes))
        return np.where((self.codes >= 0) & (self.codes != xa), self.penalty, 0.0)

    def col(self, xb: int) -> np.ndarray:
        c = self.codes[xb]
        if c < 0:
            return np.zeros(self.n_char)
        out = np.full(self.n_char, self.penalty)
        out[c] = 0.0
        out[self.eps] = 0.0
        return out

    def dense(self) -> np.ndarray:
        return np.stack([self.row(x) for x in range(self.n_char)])

    def is_finite(self) -> bool:
        return math.isfinite(self.penalty)


@dataclass(frozen=True)
class AuxBlock:
    """An aux variable together with its agreement edges, one per member position.

    ``edges[q]`` is the index of the edge to the ``q``-th member and
    ``index`` groups the rows of the shared code table. TRW-S uses it to
    compute all messages of the variable from a few passes over its domain.
    """

    var: int
    edges: Tuple[int, ...]
    index: NGramIndex


@dataclass
class FactorGraphView:
    """Variables, unary vectors and pairwise edges of a pairwise energy.

    ``order`` is the visiting order used by TRW-S; it defaults to index order.
    ``n_char`` marks the first ``n_char`` variables as character nodes, the
    rest as auxiliary nodes (only used to convert results to a labeling).
    ``blocks`` optionally marks aux variables for the grouped message path.
    """

    unaries: List[np.ndarray]
    edges: list
    order: Optional[List[int]] = None
    n_char: Optional[int] = None
    blocks: List[AuxBlock] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.unaries = [np.asarray(u, dtype=float) for u in self.unaries]
        if self.order is None:
            self.order = list(range(len(self.unaries)))
        if sorted(self.order) != list(range(len(self.unaries))):
            raise ValueError("order must be a permutation of the variables")
        if self.n_char is None:
            self.n_char = len(self.unaries)
        for e in self.edges:
            if e.a == e.b:
                raise ValueError("self-loop edge")
            if e.shape != (len(self.unaries[e.a]), len(self.unaries[e.b])):
                raise ValueError(f"edge ({e.a},{e.b}) shape {e.shape} does not match domains")
        self._check_blocks()

    def _check_blocks(self) -> None:
        rank = {v: r for r, v in enumerate(self.order)}
        for blk in self.blocks:
            n_edges = sum(blk.var in (e.a, e.b) for e in self.edges)
            if len(blk.edges) != blk.index.n or n_edges != blk.index.n:
                raise ValueError(f"aux block {blk.var} must own exactly one edge per position")
            if len(self.unaries[blk.var]) != blk.index.M + 1:
                raise ValueError(f"aux block {blk.var} domain does not match its code table")
            penalties = set()
            for q, ei in enumerate(blk.edges):
                e = self.edges[ei]
                if not isinstance(e, AgreementEdge) or e.b != blk.var:
                    raise ValueError(f"aux block {blk.var}: edge {ei} is not an agreement edge into it")
                col = blk.index.codes[:, q]
                if e.codes[-1] != -1 or not np.array_equal(e.codes[:-1], col):
                    raise ValueError(f"aux block {blk.var}: edge {ei} codes differ from column {q}")
                if rank[e.a] > rank[blk.var]:
                    raise ValueError(f"aux block {blk.var} must be visited after its members")
                penalties.add(e.penalty)
            if len(penalties) > 1:
                raise ValueError(f"aux block {blk.var} mixes agreement penalties")

    @property
    def domain_sizes(self) -> List[int]:
        return [len(u) for u in self.unaries]

    def __len__(self) -> int:
        return len(self.unaries)

    def check_finite(self) -> None:
        for i, u in enumerate(self.unaries):
            if not np.all(np.isfinite(u)):
                raise ValueError(f"non-finite unary entry on variable {i}")
        for e in self.edges:
            if not e.is_finite():
                raise ValueError(f"non-finite pairwise entry on edge ({e.a},{e.b})")

    def energy(self, labels: Sequence[int]) -> float:
        e = sum(float(u[x]) for u, x in zip(self.unaries, labels))
        for edge in self.edges:
            e += edge.cost(labels[edge.a], labels[edge.b])
        return e

    def to_labeling(self, labels: Sequence[int]) -> Labeling:
        labels = [int(x) for x in labels]
        return Labeling(labels[: self.n_char], labels[self.n_char :])

    def from_labeling(self, labeling: Labeling) -> List[int]:
        return list(labeling.chars) + list(labeling.aux)


def build_factor_view(
    em: EnergyModel, domain_cap: int = DEFAULT_DOMAIN_CAP, use_blocks: bool = True
) -> FactorGraphView:
    """Flatten an :class:`EnergyModel` into unary vectors and pairwise edges.

    Variables ``0..N-1`` are the character nodes, ``N..`` the auxiliary nodes.
    The visiting order places each aux node right after its last member.
    With ``use_blocks`` the aux nodes are also registered as :class:`AuxBlock`.
    """
    g = em.graph
    N = g.N
    unaries = [em.unary_table(i) for i in range(N)]
    edges: list = [DenseEdge(i, j, em.edge_table(i, j)) for i, j in g.edges]
    blocks: List[AuxBlock] = []
    if g.aux_nodes:
        ls = g.label_set
        if ls.size > domain_cap:
            raise DomainOverflowError(f"extended label set of size {ls.size} exceeds cap {domain_cap}")
        aux_unary = em.aux_unary
        codes = [em.aux_codes(q) for q in range(ls.n)]
        kk = em.alphabet.k + 1
        eps = em.alphabet.epsilon_index
        for a, aux in enumerate(g.aux_nodes):
            unaries.append(aux_unary)
            first = len(edges)
            for q, r in enumerate(aux.members):
                edges.append(AgreementEdge(r, N + a, codes[q], kk, eps, em.params.lambda_b))
            blocks.append(AuxBlock(N + a, tuple(range(first, len(edges))), ls.index))
    order: List[int] = []
    pending = {}
    for a, aux in enumerate(g.aux_nodes):
        pending.setdefault(max(aux.members), []).append(N + a)
    for i in range(N):
        order.append(i)
        order.extend(pending.get(i, []))
    view = FactorGraphView(unaries, edges, order, n_char=N)
    if use_blocks:
        view.blocks = blocks
        view._check_blocks()
    return view


@dataclass
class InferenceResult:
    labels: List[int]
    energy: float
    lower_bound: float
    iterations: int
    converged: bool
    bound_trace: List[float] = field(default_factory=list)
    labeling: Optional[Labeling] = None


class _Chains:
    """Monotonic chains covering every edge once; node ``s`` lies on ``n_s`` chains."""

    def __init__(self, view: FactorGraphView, rank: np.ndarray, incident: List[List[int]]):
        self.chains: List[Tuple[List[int], List[int]]] = []
        chain_of_edge = {}
        for s in view.order:
            arriving = []
            outgoing = []
            for ei in incident[s]:
                e = view.edges[ei]
                other = e.b if e.a == s else e.a
                (arriving if rank[other] < rank[s] else outgoing).append((ei, other))
            arriving_chains = [chain_of_edge[ei] for ei, _ in arriving]
            if not arriving and not outgoing:
                self.chains.append(([s], []))
            for k_out, (ei, other) in enumerate(outgoing):
                if k_out < len(arriving_chains):
                    c = arriving_chains[k_out]
                else:
                    c = len(self.chains)
                    self.chains.append(([s], []))
                self.chains[c][0].append(other)
                self.chains[c][1].append(ei)
                chain_of_edge[ei] = c


def trws_minimize(
    view: FactorGraphView,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    compiled: bool = True,
) -> InferenceResult:
    """Minimise the energy of ``view`` with sequential tree-reweighted message passing.

    Stops when the relative lower-bound gain of an iteration falls to ``tol`` or
    below, when the bound meets the best energy found (certified optimum), or
    after ``max_iters`` forward/backward sweeps. The returned labeling is the
    lowest-energy one extracted over all iterations.

    Views built by :func:`build_factor_view` with aux blocks run on a compiled
    solver; ``compiled=False`` forces the generic one. Both follow the same
    schedule and agree up to floating-point summation order.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    view.check_finite()
    if compiled:
        packed = _pack_structured(view)
        if packed is not None:
            return _run_structured(view, packed, max_iters, tol)
    V = len(view)
    if V == 0:
        return InferenceResult([], 0.0, 0.0, 0, True, [0.0], Labeling([], []))
    order = view.order
    rank = np.empty(V, dtype=int)
    rank[order] = np.arange(V)
    incident: List[List[int]] = [[] for _ in range(V)]
    for ei, e in enumerate(view.edges):
        incident[e.a].append(ei)
        incident[e.b].append(ei)
    before = [[ei for ei in incident[s] if rank[_other(view.edges[ei], s)] < rank[s]] for s in range(V)]
    after = [[ei for ei in incident[s] if rank[_other(view.edges[ei], s)] > rank[s]] for s in range(V)]
    weight = [1.0 / max(len(before[s]), len(after[s]), 1) for s in range(V)]
    # to_b[ei]: message from a to b (over b's labels); to_a[ei]: from b to a
    to_b = [np.zeros(len(view.unaries[e.b])) for e in view.edges]
    to_a = [np.zeros(len(view.unaries[e.a])) for e in view.edges]
    chains = _Chains(view, rank, incident)

    def incoming(s: int) -> np.ndarray:
        theta = view.unaries[s].copy()
        for ei in incident[s]:
            theta += to_b[ei] if view.edges[ei].a != s else to_a[ei]
        return theta

    def send(s: int, targets: List[int]) -> None:
        h_s = incoming(s) * weight[s]
        for ei in targets:
            e = view.edges[ei]
            if e.a == s:
                m = e.min_over_a(h_s - to_a[ei])
                to_b[ei] = m - m.min()
            else:
                m = e.min_over_b(h_s - to_b[ei])
                to_a[ei] = m - m.min()

    def bound() -> float:
        theta_bar = {}
        total = 0.0
        for vars_, eids in chains.chains:
            s0 = vars_[0]
            if s0 not in theta_bar:
                theta_bar[s0] = incoming(s0) * weight[s0]
            f = theta_bar[s0]
            for p, q, ei in zip(vars_[:-1], vars_[1:], eids):
                e = view.edges[ei]
                if q not in theta_bar:
                    theta_bar[q] = incoming(q) * weight[q]
                if e.a == p:
                    f = e.min_over_a(f - to_a[ei]) - to_b[ei] + theta_bar[q]
                else:
                    f = e.min_over_b(f - to_b[ei]) - to_a[ei] + theta_bar[q]
            total += float(f.min())
        return total

    def extract() -> List[int]:
        x = [0] * V
        for s in order:
            score = view.unaries[s].copy()
            for ei in before[s]:
                e = view.edges[ei]
                score += e.row(x[e.a]) if e.b == s else e.col(x[e.b])
            for ei in after[s]:
                score += to_a[ei] if view.edges[ei].a == s else to_b[ei]
            x[s] = int(np.argmin(score))
        return x

    best_x: List[int] = []
    best_e = math.inf
    trace: List[float] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        for s in order:
            send(s, after[s])
        for s in reversed(order):
            send(s, before[s])
        lb = bound()
        trace.append(lb)
        x = extract()
        e = view.energy(x)
        if e < best_e:
            best_e, best_x = e, x
        log.debug("trws iter %d: bound=%.12g energy=%.12g", it, lb, best_e)
        if _should_stop(trace, best_e, tol):
            converged = True
            break
    return InferenceResult(best_x, best_e, max(trace), it, converged, trace, view.to_labeling(best_x))


def _should_stop(trace: List[float], best_e: float, tol: float) -> bool:
    lb = trace[-1]
    if best_e - lb <= 1e-9 * max(1.0, abs(best_e)):
        return True
    return len(trace) > 1 and lb - trace[-2] <= tol * max(1.0, abs(lb))


@dataclass
class _Packed:
    """Flat arrays of a structured view for the compiled solver."""

    arrays: tuple
    N: int
    n_blocks: int


def _pack_structured(view: FactorGraphView) -> Optional[_Packed]:
    """Arrays for the compiled solver, or None when ``view`` lacks its structure.

    The structure is the one :func:`build_factor_view` emits: character
    variables first, visited in index order, sharing one domain size; dense
    edges between characters pointing forward; every other variable an aux
    block, all blocks sharing one unary vector and code table and each
    visited right after its last member.
    """
    N = view.n_char
    V = len(view)
    if N == 0 or len(view.blocks) != V - N:
        return None
    K = len(view.unaries[0])
    if any(len(view.unaries[s]) != K for s in range(N)):
        return None
    blocks = sorted(view.blocks, key=lambda b: b.var)
    if [b.var for b in blocks] != list(range(N, V)):
        return None
    block_edges = {ei for b in blocks for ei in b.edges}
    dense = [ei for ei in range(len(view.edges)) if ei not in block_edges]
    for ei in dense:
        e = view.edges[ei]
        if not isinstance(e, DenseEdge) or not (0 <= e.a < e.b < N):
            return None
    if blocks:
        ix = blocks[0].index
        U = view.unaries[N]
        e0 = view.edges[blocks[0].edges[0]]
        for b in blocks:
            if b.index is not ix or not (view.unaries[b.var] is U or np.array_equal(view.unaries[b.var], U)):
                return None
            for ei in b.edges:
                e = view.edges[ei]
                if e.n_char != K or e.eps != e0.eps or e.penalty != e0.penalty:
                    return None
        n, eps, pen = ix.n, e0.eps, e0.penalty
    else:
        ix, U, n, eps, pen = NGramIndex(np.zeros((0, 1), dtype=np.int64)), np.zeros(1), 1, 0, 0.0
    members = np.array([[view.edges[ei].a for ei in b.edges] for b in blocks], dtype=np.int64).reshape(
        len(blocks), n
    )
    canonical: List[int] = []
    pending: dict = {}
    for bi, b in enumerate(blocks):
        pending.setdefault(int(members[bi].max()), []).append(b.var)
    for i in range(N):
        canonical.append(i)
        canonical.extend(pending.get(i, []))
    if list(view.order) != canonical:
        return None

    ea = np.array([view.edges[ei].a for ei in dense], dtype=np.int64)
    eb = np.array([view.edges[ei].b for ei in dense], dtype=np.int64)
    tables = np.ascontiguousarray(
        np.stack([view.edges[ei].table for ei in dense]) if dense else np.zeros((0, K, K))
    )
    unary = np.ascontiguousarray(np.stack(view.unaries[:N]))
    before_ptr, before_idx = _csr(N, eb, np.arange(len(dense)))
    after_ptr, after_idx = _csr(N, ea, np.arange(len(dense)))
    slots = np.arange(members.size)  # slot = block * n + position
    blk_ptr, blk_idx = _csr(N, members.reshape(-1), slots)
    last_ptr, last_idx = _csr(N, members.max(axis=1) if len(blocks) else np.zeros(0, np.int64),
                              np.arange(len(blocks)))
    n_after = np.diff(after_ptr) + np.diff(blk_ptr)
    w_char = 1.0 / np.maximum(np.maximum(np.diff(before_ptr), n_after), 1)
    w_blk = 1.0 / n

    # chain decomposition, encoded as dense edge ids (>= 0) or -(1 + slot)
    rank = np.empty(V, dtype=int)
    rank[view.order] = np.arange(V)
    incident: List[List[int]] = [[] for _ in range(V)]
    for ei, e in enumerate(view.edges):
        incident[e.a].append(ei)
        incident[e.b].append(ei)
    dense_pos = {ei: k for k, ei in enumerate(dense)}
    slot_of = {ei: bi * n + q for bi, b in enumerate(blocks) for q, ei in enumerate(b.edges)}
    chain_ptr = [0]
    chain_start = []
    chain_code = []
    for vars_, eids in _Chains(view, rank, incident).chains:
        chain_start.append(vars_[0])
        for ei in eids:
            chain_code.append(dense_pos[ei] if ei in dense_pos else -(1 + slot_of[ei]))
        chain_ptr.append(len(chain_code))
    arrays = (
        unary, ea, eb, tables,
        before_ptr, before_idx, after_ptr, after_idx, blk_ptr, blk_idx, last_ptr, last_idx,
        w_char, w_blk, members,
        np.ascontiguousarray(U, dtype=float), ix.h, ix.head_ids, ix.tail_ids, ix.head_patterns,
        ix.tail_patterns, ix.codes, eps, pen,
        np.array(chain_ptr, dtype=np.int64), np.array(chain_start, dtype=np.int64),
        np.array(chain_code, dtype=np.int64),
    )
    return _Packed(arrays, N, len(blocks))


def _csr(n_rows: int, rows: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.asarray(rows, dtype=np.int64)
    order = np.argsort(rows, kind="stable")
    ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.add.at(ptr, rows + 1, 1)
    return np.cumsum(ptr), np.asarray(values, dtype=np.int64)[order]


def _run_structured(view: FactorGraphView, packed: _Packed, max_iters: int, tol: float) -> InferenceResult:
    chars = np.zeros(packed.N, dtype=np.int64)
    aux = np.zeros(packed.n_blocks, dtype=np.int64)
    trace = np.zeros(max(max_iters, 1))
    it, converged = _kernels.trws_structured(*packed.arrays, max_iters, tol, chars, aux, trace)
    labels = [int(x) for x in chars] + [int(y) for y in aux]
    trace_list = [float(t) for t in trace[:it]]
    return InferenceResult(
        labels, view.energy(labels), max(trace_list), int(it), bool(converged), trace_list,
        view.to_labeling(labels),
    )


def _other(e, s: int) -> int:
    return e.b if e.a == s else e.a


def brute_force_minimize(view: FactorGraphView, limit: int = BRUTE_FORCE_LIMIT) -> InferenceResult:
    """Exact minimum by enumeration.

    Variables are split into an independent set, minimised in closed form
    for each assignment of the rest, and an enumerated remainder whose joint
    domain must not exceed ``limit``. Ties go to the lexicographically first
    assignment of the enumerated variables.
    """
    V = len(view)
    if V == 0:
        return InferenceResult([], 0.0, 0.0, 0, True, [0.0], Labeling([], []))
    sizes = view.domain_sizes
    nbrs = [set() for _ in range(V)]
    for e in view.edges:
        nbrs[e.a].add(e.b)
        nbrs[e.b].add(e.a)
    free: List[int] = []
    for v in sorted(range(V), key=lambda v: (-sizes[v], v)):
        if not nbrs[v] & set(free):
            free.append(v)
    free_set = set(free)
    enum = [v for v in range(V) if v not in free_set]
    total = math.prod(sizes[v] for v in enum)
    if total > limit:
        raise InstanceTooLargeError(f"{total} joint assignments exceed the limit {limit}")
    col = {v: c for c, v in enumerate(enum)}
    inner = [e for e in view.edges if e.a in col and e.b in col]
    tables = {id(e): e.dense() for e in view.edges}

    best_e = math.inf
    best_row: Optional[np.ndarray] = None
    chunk = 1 << 16
    ranges = [range(sizes[v]) for v in enum]
    it = itertools.product(*ranges)
    while True:
        rows = list(itertools.islice(it, chunk))
        if not rows:
            break
        X = np.array(rows, dtype=np.int64).reshape(len(rows), len(enum))
        cost = np.zeros(len(X))
        for v in enum:
            cost += view.unaries[v][X[:, col[v]]]
        for e in inner:
            cost += tables[id(e)][X[:, col[e.a]], X[:, col[e.b]]]
        for f in free:
            acc = np.broadcast_to(view.unaries[f], (len(X), sizes[f])).copy()
            for e in view.edges:
                if e.a == f:
                    acc += tables[id(e)][:, X[:, col[e.b]]].T
                elif e.b == f:
                    acc += tables[id(e)][X[:, col[e.a]], :]
            cost += acc.min(axis=1)
        r = int(np.argmin(cost))
        if cost[r] < best_e:
            best_e, best_row = float(cost[r]), X[r]
    labels = [0] * V
    for v in enum:
        labels[v] = int(best_row[col[v]])
    for f in free:
        acc = view.unaries[f].copy()
        for e in view.edges:
            if e.a == f:
                acc += tables[id(e)][:, labels[e.b]]
            elif e.b == f:
                acc += tables[id(e)][labels[e.a], :]
        labels[f] = int(np.argmin(acc))
    energy = view.energy(labels)
    return InferenceResult(labels, energy, energy, 1, True, [energy], view.to_labeling(labels))
