"""
Edmonds' blossom algorithm for maximum-weight matching on general graphs.

Primal-dual schema with blossom shrinking and least-slack edge tracking, O(n**3).
Vertex duals are stored doubled so integer weights keep every dual integral.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence

from exceptions.exceptions import InvariantViolationError

S_LABEL = 1
T_LABEL = 2
BREADCRUMB = 4


class _Blossom:
    """
    Non-trivial blossom: childs[i] and childs[i+1] are joined by edges[i] = (v, w),
    v in childs[i], w in childs[i+1], cyclically; childs[0] holds the base.
    """

    __slots__ = ("childs", "edges", "best_edges")

    def __init__(self) -> None:
        self.childs: list[Node] = []
        self.edges: list[tuple[int, int]] = []
        self.best_edges: list[tuple[int, int]] | None = None

    def leaves(self) -> Iterator[int]:
        stack = list(self.childs)
        while stack:
            node = stack.pop()
            if isinstance(node, _Blossom):
                stack.extend(node.childs)
            else:
                yield node


Node = int | _Blossom


class BlossomMatcher:
    """
    Maximum-weight matching solver over vertices 0..num_vertices-1.

    Args:
        num_vertices (int): vertex count
        edges (Sequence[tuple[int, int, int]]): (u, v, weight) with integer weights, at most one per pair
        max_cardinality (bool): only accept maximum-cardinality matchings
    """

    def __init__(self, num_vertices: int, edges: Sequence[tuple[int, int, int]], max_cardinality: bool = False) -> None:
        self.num_vertices = num_vertices
        self.max_cardinality = max_cardinality
        self.neighbors: list[list[int]] = [[] for _ in range(num_vertices)]
        self.weights: dict[tuple[int, int], int] = {}

        for u, v, w in edges:
            if u == v:
                continue
            self.neighbors[u].append(v)
            self.neighbors[v].append(u)
            self.weights[(u, v)] = self.weights[(v, u)] = w

        max_weight = max((w for _, _, w in edges), default=0)
        vertices = range(num_vertices)

        self.mate: dict[int, int] = {}
        self.label: dict[Node, int | None] = {}
        self.label_edge: dict[Node, tuple[int, int] | None] = {}
        self.in_blossom: dict[int, Node] = {v: v for v in vertices}
        self.blossom_parent: dict[Node, _Blossom | None] = {v: None for v in vertices}
        self.blossom_base: dict[Node, int] = {v: v for v in vertices}
        self.best_edge: dict[Node, tuple[int, int] | None] = {}
        self.dual: dict[int, int] = {v: max_weight for v in vertices}
        self.blossom_dual: dict[_Blossom, int] = {}
        self.allowed: set[tuple[int, int]] = set()
        self.queue: list[int] = []

    def slack(self, v: int, w: int) -> int:
        # twice the edge slack; only meaningful between different top-level blossoms
        return self.dual[v] + self.dual[w] - 2 * self.weights[(v, w)]

    def _assign_label(self, w: int, label: int, v: int | None) -> None:
        pending: list[tuple[int, int, int | None]] = [(w, label, v)]
        while pending:
            _w, _label, _v = pending.pop()
            b = self.in_blossom[_w]
            self.label[_w] = self.label[b] = _label
            self.label_edge[_w] = self.label_edge[b] = (_v, _w) if _v is not None else None
            self.best_edge[_w] = self.best_edge[b] = None

            if _label == S_LABEL:
                if isinstance(b, _Blossom):
                    self.queue.extend(b.leaves())
                else:
                    self.queue.append(b)
            else:
                # a T-blossom's base is its only vertex with an external mate
                _base = self.blossom_base[b]
                pending.append((self.mate[_base], S_LABEL, _base))

    def _scan_blossom(self, v: int, w: int) -> int | None:
        """
        Trace back from v and w; return the base of a new blossom, None on an augmenting path.
        """
        _path: list[Node] = []
        _base: int | None = None
        _v: int | None = v
        _w: int | None = w

        while _v is not None:
            b = self.in_blossom[_v]
            if self.label[b] & BREADCRUMB:  # type: ignore[operator]
                _base = self.blossom_base[b]
                break

            _path.append(b)
            self.label[b] = S_LABEL | BREADCRUMB
            edge = self.label_edge[b]
            if edge is None:
                _v = None
            else:
                _v = edge[0]
                b = self.in_blossom[_v]
                _v = self.label_edge[b][0]  # type: ignore[index]

            if _w is not None:
                _v, _w = _w, _v

        for b in _path:
            self.label[b] = S_LABEL
        return _base

    def _add_blossom(self, base: int, v: int, w: int) -> None:
        bb = self.in_blossom[base]
        bv = self.in_blossom[v]
        bw = self.in_blossom[w]

        blossom = _Blossom()
        self.blossom_base[blossom] = base
        self.blossom_parent[blossom] = None
        self.blossom_parent[bb] = blossom

        path: list[Node] = []
        edges: list[tuple[int, int]] = [(v, w)]
        while bv != bb:
            self.blossom_parent[bv] = blossom
            path.append(bv)
            edges.append(self.label_edge[bv])  # type: ignore[arg-type]
            v = self.label_edge[bv][0]  # type: ignore[index]
            bv = self.in_blossom[v]

        path.append(bb)
        path.reverse()
        edges.reverse()

        while bw != bb:
            self.blossom_parent[bw] = blossom
            path.append(bw)
            label_edge = self.label_edge[bw]
            edges.append((label_edge[1], label_edge[0]))  # type: ignore[index]
            w = label_edge[0]  # type: ignore[index]
            bw = self.in_blossom[w]

        blossom.childs = path
        blossom.edges = edges
        self.label[blossom] = S_LABEL
        self.label_edge[blossom] = self.label_edge[bb]
        self.blossom_dual[blossom] = 0

        for leaf in blossom.leaves():
            if self.label[self.in_blossom[leaf]] == T_LABEL:
                self.queue.append(leaf)
            self.in_blossom[leaf] = blossom

        best_to: dict[Node, tuple[int, int]] = {}
        for child in path:
            if isinstance(child, _Blossom):
                if child.best_edges is not None:
                    candidates = child.best_edges
                    child.best_edges = None
                else:
                    candidates = [(i, j) for i in child.leaves() for j in self.neighbors[i]]
            else:
                candidates = [(child, j) for j in self.neighbors[child]]

            for edge in candidates:
                i, j = edge
                if self.in_blossom[j] == blossom:
                    i, j = j, i
                bj = self.in_blossom[j]
                if (
                    bj != blossom
                    and self.label.get(bj) == S_LABEL
                    and (bj not in best_to or self.slack(i, j) < self.slack(*best_to[bj]))
                ):
                    best_to[bj] = (i, j)
            self.best_edge[child] = None

        blossom.best_edges = list(best_to.values())
        best: tuple[int, int] | None = None
        for edge in blossom.best_edges:
            if best is None or self.slack(*edge) < self.slack(*best):
                best = edge
        self.best_edge[blossom] = best

    def _expand_blossom(self, blossom: _Blossom, end_stage: bool) -> None:
        # explicit stack of generators instead of recursion
        _stack = [self._expand_one(blossom=blossom, end_stage=end_stage)]
        while _stack:
            for child in _stack[-1]:
                _stack.append(self._expand_one(blossom=child, end_stage=end_stage))
                break
            else:
                _stack.pop()

    def _expand_one(self, blossom: _Blossom, end_stage: bool) -> Iterator[_Blossom]:
        for child in blossom.childs:
            self.blossom_parent[child] = None
            if isinstance(child, _Blossom):
                if end_stage and self.blossom_dual[child] == 0:
                    yield child
                else:
                    for leaf in child.leaves():
                        self.in_blossom[leaf] = child
            else:
                self.in_blossom[child] = child

        if not end_stage and self.label.get(blossom) == T_LABEL:
            self._relabel_expanded(blossom=blossom)

        self.label.pop(blossom, None)
        self.label_edge.pop(blossom, None)
        self.best_edge.pop(blossom, None)
        del self.blossom_parent[blossom]
        del self.blossom_base[blossom]
        del self.blossom_dual[blossom]

    def _relabel_expanded(self, blossom: _Blossom) -> None:
        entry_child = self.in_blossom[self.label_edge[blossom][1]]  # type: ignore[index]
        j = blossom.childs.index(entry_child)
        if j & 1:
            j -= len(blossom.childs)
            step = 1
        else:
            step = -1

        v, w = self.label_edge[blossom]  # type: ignore[misc]
        while j != 0:
            if step == 1:
                p, q = blossom.edges[j]
            else:
                q, p = blossom.edges[j - 1]
            self.label[w] = None
            self.label[q] = None
            self._assign_label(w=w, label=T_LABEL, v=v)
            self.allowed.update(((p, q), (q, p)))
            j += step
            if step == 1:
                v, w = blossom.edges[j]
            else:
                w, v = blossom.edges[j - 1]
            self.allowed.update(((v, w), (w, v)))
            j += step

        bw = blossom.childs[j]
        self.label[w] = self.label[bw] = T_LABEL
        self.label_edge[w] = self.label_edge[bw] = (v, w)
        self.best_edge[bw] = None

        j += step
        while blossom.childs[j] != entry_child:
            bv = blossom.childs[j]
            if self.label.get(bv) == S_LABEL:
                j += step
                continue

            reached: int | None = None
            leaves = bv.leaves() if isinstance(bv, _Blossom) else iter((bv,))
            for leaf in leaves:
                if self.label.get(leaf):
                    reached = leaf
                    break

            if reached is not None:
                self.label[reached] = None
                self.label[self.mate[self.blossom_base[bv]]] = None
                self._assign_label(w=reached, label=T_LABEL, v=self.label_edge[reached][0])  # type: ignore[index]
            j += step

    def _augment_blossom(self, blossom: _Blossom, v: int) -> None:
        stack = [self._augment_one(blossom=blossom, v=v)]
        while stack:
            for args in stack[-1]:
                stack.append(self._augment_one(*args))
                break
            else:
                stack.pop()

    def _augment_one(self, blossom: _Blossom, v: int) -> Iterator[tuple[_Blossom, int]]:
        t: Node = v
        while self.blossom_parent[t] != blossom:
            t = self.blossom_parent[t]  # type: ignore[assignment]
        if isinstance(t, _Blossom):
            yield t, v

        i = j = blossom.childs.index(t)
        if i & 1:
            j -= len(blossom.childs)
            step = 1
        else:
            step = -1

        while j != 0:
            j += step
            t = blossom.childs[j]
            if step == 1:
                w, x = blossom.edges[j]
            else:
                x, w = blossom.edges[j - 1]
            if isinstance(t, _Blossom):
                yield t, w
            j += step
            t = blossom.childs[j]
            if isinstance(t, _Blossom):
                yield t, x
            self.mate[w] = x
            self.mate[x] = w

        blossom.childs = blossom.childs[i:] + blossom.childs[:i]
        blossom.edges = blossom.edges[i:] + blossom.edges[:i]
        self.blossom_base[blossom] = self.blossom_base[blossom.childs[0]]

    def _augment_matching(self, v: int, w: int) -> None:
        for s, j in ((v, w), (w, v)):
            while True:
                bs = self.in_blossom[s]
                if isinstance(bs, _Blossom):
                    self._augment_blossom(blossom=bs, v=s)
                self.mate[s] = j

                if self.label_edge[bs] is None:
                    break
                t = self.label_edge[bs][0]  # type: ignore[index]
                bt = self.in_blossom[t]
                s, j = self.label_edge[bt]  # type: ignore[misc]
                if isinstance(bt, _Blossom):
                    self._augment_blossom(blossom=bt, v=j)
                self.mate[j] = s

    def _scan_queue(self) -> bool:
        while self.queue:
            v = self.queue.pop()
            for w in self.neighbors[v]:
                bv = self.in_blossom[v]
                bw = self.in_blossom[w]
                if bv == bw:
                    continue

                slack = 0
                if (v, w) not in self.allowed:
                    slack = self.slack(v, w)
                    if slack <= 0:
                        self.allowed.update(((v, w), (w, v)))

                if (v, w) in self.allowed:
                    if self.label.get(bw) is None:
                        self._assign_label(w=w, label=T_LABEL, v=v)
                    elif self.label.get(bw) == S_LABEL:
                        base = self._scan_blossom(v=v, w=w)
                        if base is not None:
                            self._add_blossom(base=base, v=v, w=w)
                        else:
                            self._augment_matching(v=v, w=w)
                            return True
                    elif self.label.get(w) is None:
                        self.label[w] = T_LABEL
                        self.label_edge[w] = (v, w)
                elif self.label.get(bw) == S_LABEL:
                    best = self.best_edge.get(bv)
                    if best is None or slack < self.slack(*best):
                        self.best_edge[bv] = (v, w)
                elif self.label.get(w) is None:
                    best = self.best_edge.get(w)
                    if best is None or slack < self.slack(*best):
                        self.best_edge[w] = (v, w)
        return False

    def _update_duals(self) -> bool:
        """
        Pick the smallest dual step, apply it and act on it. False once the optimum is reached.
        """
        delta_type = -1
        delta = 0
        delta_edge: tuple[int, int] | None = None
        delta_blossom: _Blossom | None = None

        if not self.max_cardinality:
            delta_type = 1
            delta = min(self.dual.values())

        for v in range(self.num_vertices):
            best = self.best_edge.get(v)
            if self.label.get(self.in_blossom[v]) is None and best is not None:
                d = self.slack(*best)
                if delta_type == -1 or d < delta:
                    delta, delta_type, delta_edge = d, 2, best

        for b, parent in self.blossom_parent.items():
            best = self.best_edge.get(b)
            if parent is None and self.label.get(b) == S_LABEL and best is not None:
                _slack = self.slack(*best)
                if _slack % 2:
                    raise InvariantViolationError(f"Odd slack {_slack} between S-blossoms")
                d = _slack // 2
                if delta_type == -1 or d < delta:
                    delta, delta_type, delta_edge = d, 3, best

        for b, z in self.blossom_dual.items():
            if self.blossom_parent[b] is None and self.label.get(b) == T_LABEL and (delta_type == -1 or z < delta):
                delta, delta_type, delta_blossom = z, 4, b

        if delta_type == -1:
            delta_type = 1
            delta = max(0, min(self.dual.values()))

        for v in range(self.num_vertices):
            label = self.label.get(self.in_blossom[v])
            if label == S_LABEL:
                self.dual[v] -= delta
            elif label == T_LABEL:
                self.dual[v] += delta

        for b in self.blossom_dual:
            if self.blossom_parent[b] is None:
                if self.label.get(b) == S_LABEL:
                    self.blossom_dual[b] += delta
                elif self.label.get(b) == T_LABEL:
                    self.blossom_dual[b] -= delta

        if delta_type == 1:
            return False

        if delta_type in (2, 3):
            v, w = delta_edge  # type: ignore[misc]
            self.allowed.update(((v, w), (w, v)))
            self.queue.append(v)
        else:
            self._expand_blossom(blossom=delta_blossom, end_stage=False)  # type: ignore[arg-type]
        return True

    def _run_stage(self) -> bool:
        self.label.clear()
        self.label_edge.clear()
        self.best_edge.clear()
        for b in self.blossom_dual:
            b.best_edges = None
        self.allowed.clear()
        self.queue.clear()

        for v in range(self.num_vertices):
            if v not in self.mate and self.label.get(self.in_blossom[v]) is None:
                self._assign_label(w=v, label=S_LABEL, v=None)

        augmented = False
        while True:
            if self._scan_queue():
                augmented = True
                break
            if not self._update_duals():
                break

        if not augmented:
            return False

        for b in list(self.blossom_dual):
            if b not in self.blossom_dual:
                continue
            if self.blossom_parent[b] is None and self.label.get(b) == S_LABEL and self.blossom_dual[b] == 0:
                self._expand_blossom(blossom=b, end_stage=True)
        return True

    def solve(self) -> list[int]:
        """
        Returns:
            list[int]: mate of every vertex, -1 when unmatched
        """
        if self.num_vertices and self.weights:
            while self._run_stage():
                pass
        return [self.mate.get(v, -1) for v in range(self.num_vertices)]

    def verify_optimum(self) -> None:
        """
        Check complementary slackness of the final primal/dual pair.

        Raises:
            InvariantViolationError: the matching is not provably optimal
        """
        offset = max(0, -min(self.dual.values(), default=0)) if self.max_cardinality else 0
        if min(self.dual.values(), default=0) + offset < 0 or any(z < 0 for z in self.blossom_dual.values()):
            raise InvariantViolationError("Negative dual variable")

        for (i, j), weight in self.weights.items():
            if i > j:
                continue
            _slack = self.dual[i] + self.dual[j] - 2 * weight
            i_chain = self._blossom_chain(node=i)
            j_chain = self._blossom_chain(node=j)
            for bi, bj in zip(i_chain, j_chain):
                if bi != bj:
                    break
                _slack += 2 * self.blossom_dual[bi]  # type: ignore[index]
            if _slack < 0:
                raise InvariantViolationError(f"Edge ({i}, {j}) has negative slack {_slack}")
            if self.mate.get(i) == j and _slack != 0:
                raise InvariantViolationError(f"Matched edge ({i}, {j}) has slack {_slack}")

        for v in range(self.num_vertices):
            if v not in self.mate and self.dual[v] + offset != 0:
                raise InvariantViolationError(f"Single vertex {v} has dual {self.dual[v]}")

    def _blossom_chain(self, node: int) -> list[Node]:
        # outermost blossom first, the vertex itself last
        chain: list[Node] = [node]
        while self.blossom_parent[chain[-1]] is not None:
            chain.append(self.blossom_parent[chain[-1]])  # type: ignore[arg-type]
        chain.reverse()
        return chain


def max_weight_matching(
    num_vertices: int, edges: Sequence[tuple[int, int, int]], max_cardinality: bool = False, verify: bool = False
) -> list[int]:
    """
    Maximum-weight matching of an undirected graph with integer weights.

    Returns:
        list[int]: mate of every vertex, -1 when unmatched
    """
    matcher = BlossomMatcher(num_vertices=num_vertices, edges=edges, max_cardinality=max_cardinality)
    mates = matcher.solve()
    if verify:
        matcher.verify_optimum()
    return mates
