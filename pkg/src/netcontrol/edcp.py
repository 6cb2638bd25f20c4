"""Evenly-divided control paths: a graph heuristic for cheap placements.

Because steering cost grows exponentially with control path length, a good
M-driver placement covers its quota with paths of nearly equal length.  The
pipeline starts from a path/cycle cover, folds every cycle onto the tail of
the currently shortest stem (a virtual junction marks the seam), divides the
coverage target into M near-equal quotas, walks the quotas over the stems,
then reduces surplus drivers where removal is cheapest and trims surplus
nodes from the longest segments.

Control segments never span a junction: the pasted-on edge does not exist in
the graph, so a segment reaching a junction is cut there and the cycle head
hosts the next driver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .flow import SufficiencySolver
from .graph import DirectedGraph, matching_path_cover
from .lti import ControlPlacement, UncontrollableError, chain_control_cost, control_cost
from .pathcover import PathCover, extract_paths_cycles

EXACT_EVAL_THRESHOLD = 400  # dense cost evaluation above this is left out
_EXACT_COVER_LIMIT = 12  # exhaustive path-cover fallback for tiny graphs


class CoverInfeasibleError(RuntimeError):
    """No placement with the requested driver and coverage counts exists
    within the structures this pipeline can build."""


@dataclass
class Stem:
    """A stem (possibly with folded-in cycles) during driver assignment.

    nodes: full node sequence; junctions: indices where a pasted cycle
    starts; the undivided part is nodes[undivided_start:].  segments hold
    the control paths carved out so far (driver = first node).
    """

    nodes: tuple[int, ...]
    junctions: tuple[int, ...] = ()
    undivided_start: int = 0
    segments: list[list[int]] = field(default_factory=list)
    synthetic: bool = False

    @property
    def undivided_len(self) -> int:
        return len(self.nodes) - self.undivided_start

    @property
    def driver_count(self) -> int:
        return len(self.segments)

    def run_end(self, pos: int) -> int:
        """End index of the junction-free run containing position pos."""
        for j in self.junctions:
            if j > pos:
                return j
        return len(self.nodes)

    def runs(self) -> list[tuple[int, int]]:
        bounds = [0, *self.junctions, len(self.nodes)]
        return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]

    def controlled_blocks(self) -> list[list[int]]:
        """Maximal contiguous controlled node groups, one prefix per run."""
        controlled = {v for seg in self.segments for v in seg}
        blocks = []
        for a, b in self.runs():
            block = []
            for i in range(a, b):
                if self.nodes[i] in controlled:
                    block.append(self.nodes[i])
                else:
                    break
            if block:
                blocks.append(block)
        return blocks


def merge_cycles(cover: PathCover) -> list[Stem]:
    """Fold every cycle onto the tail of the currently shortest stem.

    Cycles are taken longest first (ties: lowest starting node) and each is
    rotated to start at its lowest node; the paste point is recorded as a
    junction.  A cover with cycles but no stems gets a synthetic empty host.
    """
    stems = [Stem(nodes=tuple(p)) for p in cover.paths]
    synthetic = False
    cycles = []
    for cyc in cover.cycles:
        k = cyc.index(min(cyc))
        cycles.append(tuple(cyc[k:] + cyc[:k]))
    if cycles and not stems:
        stems = [Stem(nodes=(), synthetic=True)]
        synthetic = True
    while cycles:
        cycles.sort(key=lambda c: (-len(c), c[0]))
        cyc = cycles.pop(0)
        host = min(range(len(stems)), key=lambda i: (len(stems[i].nodes), i))
        stem = stems[host]
        stem.junctions = (*stem.junctions, len(stem.nodes))
        stem.nodes = (*stem.nodes, *cyc)
    if synthetic:
        # the empty host contributed a junction at index 0; the first run
        # simply starts the stem
        stems[0].junctions = tuple(j for j in stems[0].junctions if j > 0)
    return stems


def even_division(r_size: int, m: int) -> list[int]:
    """Split r_size into m near-equal positive integers, larger parts first."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > r_size:
        raise ValueError(f"cannot divide {r_size} nodes among {m} parts")
    base, extra = divmod(r_size, m)
    return [base + 1] * extra + [base] * (m - extra)


def string_cost(q: int, d: int, t_f: float = 2.0) -> float:
    """Cost of controlling a q-node unit chain with d evenly spread drivers."""
    if not (1 <= d <= q):
        raise ValueError("need 1 <= d <= q")
    return sum(chain_control_cost(part, t_f) for part in even_division(q, d))


def _allocate_drivers(blocks: list[list[int]], d: int, t_f: float) -> tuple[float, list[int]]:
    """Cheapest way to spread d drivers over contiguous blocks (>=1 each)."""
    counts = [len(b) for b in blocks]
    if d < len(blocks) or d > sum(counts):
        raise CoverInfeasibleError(f"cannot spread {d} drivers over blocks {counts}")
    best: dict[tuple[int, int], tuple[float, list[int]]] = {(0, 0): (0.0, [])}
    for i, q in enumerate(counts):
        nxt: dict[tuple[int, int], tuple[float, list[int]]] = {}
        for (j, used), (cost, alloc) in best.items():
            if j != i:
                continue
            for di in range(1, min(q, d - used - (len(counts) - i - 1)) + 1):
                cand = (cost + string_cost(q, di, t_f), alloc + [di])
                key = (i + 1, used + di)
                if key not in nxt or cand[0] < nxt[key][0]:
                    nxt[key] = cand
        best = nxt
    return best[(len(counts), d)]


def assign_drivers(stems: list[Stem], plan: list[int], r_size: int | None = None) -> list[Stem]:
    """Walk the division plan over the stems, placing one driver per quota.

    Each quota goes to the stem with the longest undivided part (ties: lowest
    stem index).  A quota consumes nodes from the front of the undivided part
    but never across a junction; a junction-terminated run shorter than the
    quota is skipped outright (its nodes go uncontrolled) when the remaining
    material still reaches r_size, otherwise it is kept as a short segment.
    After the plan, whole runs are consumed until r_size nodes are covered.
    """
    if r_size is None:
        r_size = sum(plan)
    nc = sum(len(seg) for stem in stems for seg in stem.segments)
    capacity = sum(stem.undivided_len for stem in stems)

    def place(stem: Stem, budget: int) -> int:
        nonlocal nc, capacity
        while stem.undivided_len > 0:
            start = stem.undivided_start
            end = stem.run_end(start)
            run_len = end - start
            if run_len < budget and end < len(stem.nodes) and nc + capacity - run_len >= r_size:
                # too short for the quota and expendable: skip to the cycle head
                stem.undivided_start = end
                capacity -= run_len
                continue
            take = min(budget, run_len)
            stem.segments.append(list(stem.nodes[start:start + take]))
            stem.undivided_start = start + take
            nc += take
            capacity -= take
            return take
        return 0

    for quota in plan:
        pick = max(range(len(stems)), key=lambda i: (stems[i].undivided_len, -i))
        if stems[pick].undivided_len == 0:
            break
        place(stems[pick], quota)
    # leftover rounds keep consuming one quota's worth at a time
    tail_quota = min(plan) if plan else 1
    while nc < r_size:
        pick = max(range(len(stems)), key=lambda i: (stems[i].undivided_len, -i))
        stem = stems[pick]
        if stem.undivided_len == 0:
            raise CoverInfeasibleError(f"cover exhausted at {nc} < {r_size} controlled nodes")
        place(stem, tail_quota)
    return stems


def reduce_drivers(stems: list[Stem], m: int, t_f: float = 2.0) -> list[Stem]:
    """Release surplus drivers where the cost increase is least.

    Removing a driver from a stem re-spreads its remaining drivers evenly
    over that stem's controlled blocks (never across junctions).  Ties on
    the cost increase resolve to the later stem.
    """
    while sum(stem.driver_count for stem in stems) > m:
        best_idx, best_delta, best_alloc = -1, None, None
        for idx, stem in enumerate(stems):
            d = stem.driver_count
            if d < 2:
                continue
            blocks = stem.controlled_blocks()
            if d - 1 < len(blocks):
                continue
            cost_now, _ = _allocate_drivers(blocks, d, t_f)
            cost_less, alloc = _allocate_drivers(blocks, d - 1, t_f)
            delta = cost_less - cost_now
            if best_delta is None or delta <= best_delta:
                best_idx, best_delta, best_alloc = idx, delta, alloc
        if best_idx < 0:
            raise CoverInfeasibleError("no stem can give up a driver")
        stem = stems[best_idx]
        blocks = stem.controlled_blocks()
        stem.segments = []
        for block, d_block in zip(blocks, best_alloc):
            pos = 0
            for part in even_division(len(block), d_block):
                stem.segments.append(block[pos:pos + part])
                pos += part
    return stems


def _split_for_extra_drivers(stems: list[Stem], m: int) -> list[Stem]:
    """Add drivers by halving the longest segments until m drivers exist."""
    while sum(stem.driver_count for stem in stems) < m:
        best = None
        for stem in stems:
            for k, seg in enumerate(stem.segments):
                key = (-len(seg), seg[0])
                if best is None or key < best[0]:
                    best = (key, stem, k)
        if best is None or len(best[1].segments[best[2]]) < 2:
            raise CoverInfeasibleError("not enough controlled nodes to host drivers")
        _, stem, k = best
        seg = stem.segments[k]
        first, second = even_division(len(seg), 2)
        stem.segments[k:k + 1] = [seg[:first], seg[first:]]
    return stems


def trim_to_r(stems: list[Stem], r_size: int, longest_first: bool = True) -> list[Stem]:
    """Drop tail nodes from the longest segments until r_size remain covered.

    Ties on segment length resolve to the lowest driver-node index.  With
    longest_first=False the shortest multi-node segments shed nodes instead
    (used by the no-division baseline, which keeps its long paths).
    """
    def nc() -> int:
        return sum(len(seg) for stem in stems for seg in stem.segments)

    sign = -1 if longest_first else 1
    while nc() > r_size:
        best = None
        for stem in stems:
            for seg in stem.segments:
                if len(seg) < 2:
                    continue  # a driver always keeps its own node
                key = (sign * len(seg), seg[0])
                if best is None or key < best[0]:
                    best = (key, seg)
        best[1].pop()
    return stems


@dataclass(frozen=True)
class EdcpResult:
    placement: ControlPlacement
    segments: tuple[tuple[int, ...], ...]
    e_estimate: float
    e_exact: float | None
    fallback: str | None = None
    synthetic_host: bool = False

    def to_json(self, g: DirectedGraph | None = None) -> str:
        """Placement JSON; node ids are external when the graph is given."""
        ext = g.internal_to_external() if g is not None else None
        conv = (lambda v: ext[v]) if ext else (lambda v: v)
        payload = {
            "drivers": [conv(v) for v in self.placement.drivers],
            "controlled": [conv(v) for v in self.placement.controlled],
            "segments": [[conv(v) for v in seg] for seg in self.segments],
            "E_estimate": self.e_estimate,
            "E_exact": self.e_exact,
        }
        return json.dumps(payload, indent=2)


def _pipeline(
    cover: PathCover, m: int, r_size: int, t_f: float, plan: list[int], longest_first_trim: bool = True
) -> tuple[list[Stem], bool]:
    stems = merge_cycles(cover)
    synthetic = any(stem.synthetic for stem in stems)
    assign_drivers(stems, plan, r_size=r_size)
    if sum(stem.driver_count for stem in stems) > m:
        reduce_drivers(stems, m, t_f)
    if sum(stem.driver_count for stem in stems) < m:
        _split_for_extra_drivers(stems, m)
    trim_to_r(stems, r_size, longest_first=longest_first_trim)
    return stems, synthetic


def _exact_path_cover(g: DirectedGraph, m: int) -> PathCover | None:
    """Best coverage by exactly m vertex-disjoint paths, exhaustively."""
    adj = g.successors()
    best: tuple[int, tuple[tuple[int, ...], ...]] | None = None

    def search(avail: set[int], k: int, chosen: list[tuple[int, ...]], covered: int, min_head: int):
        nonlocal best
        if k == 0:
            if best is None or covered > best[0]:
                best = (covered, tuple(chosen))
            return
        if len(avail) < k:
            return
        for head in sorted(avail):
            if head < min_head:
                continue

            def extend(path: list[int]):
                chosen.append(tuple(path))
                search(avail - set(path), k - 1, chosen, covered + len(path), head + 1)
                chosen.pop()
                for w in adj[path[-1]]:
                    if w in avail and w not in path:
                        path.append(w)
                        extend(path)
                        path.pop()

            extend([head])

    search(set(range(g.n)), m, [], 0, 0)
    if best is None:
        return None
    return PathCover(paths=best[1], cycles=())


def _run_pipeline(
    g: DirectedGraph, m: int, r_size: int, t_f: float, plan: list[int], longest_first_trim: bool = True
) -> EdcpResult:
    """Try the full-coverage cover first, then cycle-free fallback covers."""
    _check_request(g, m, r_size)
    solver = SufficiencySolver(g)
    mstar = solver.advance_until_coverage(g.n)
    rmax = g.n if m >= mstar else solver.coverage_at(m)
    if rmax < r_size:
        raise CoverInfeasibleError(
            f"{m} controllers can cover at most {rmax} nodes, {r_size} requested"
        )
    cover = extract_paths_cycles(g, solver.as_flow())

    def candidates():
        yield cover, None
        if m != mstar:
            # a cover with exactly m paths spreads quota drivers over fewer,
            # reducible stems when the full-coverage cover fragments
            fresh = SufficiencySolver(g)
            fresh.advance_to(m)
            yield extract_paths_cycles(g, fresh.as_flow()), "m-unit-cover"
        match_paths = matching_path_cover(g)
        if match_paths:
            yield PathCover(paths=tuple(tuple(p) for p in match_paths), cycles=()), "matching-paths"
        if g.n <= _EXACT_COVER_LIMIT:
            exact = _exact_path_cover(g, m)
            if exact is not None:
                yield exact, "exact-paths"

    last_error: Exception | None = None
    for cand, fallback in candidates():
        if cand.size < r_size:
            continue
        try:
            stems, synthetic = _pipeline(cand, m, r_size, t_f, list(plan), longest_first_trim)
        except CoverInfeasibleError as exc:
            last_error = exc
            continue
        return _result_from_stems(g, stems, t_f, fallback, synthetic)
    raise CoverInfeasibleError(
        f"no ({m}-driver, {r_size}-node) placement found" + (f": {last_error}" if last_error else "")
    )


def edcp(g: DirectedGraph, m: int, r_size: int, t_f: float = 2.0) -> EdcpResult:
    """Place m drivers to control exactly r_size nodes of g at low cost.

    Returns the placement, its control segments, the summed chain-cost
    estimate and, for graphs up to EXACT_EVAL_THRESHOLD nodes, the exact
    expected steering cost (None when the dense evaluation is skipped or
    numerically out of range).
    """
    return _run_pipeline(g, m, r_size, t_f, even_division(r_size, m))


def naive_placement(g: DirectedGraph, m: int, r_size: int, t_f: float = 2.0) -> EdcpResult:
    """Baseline with drivers at stem heads and no even division.

    Every driver greedily grabs the longest remaining undivided run whole,
    so the cost is dominated by long control paths, which is exactly what
    even division avoids.  Surplus drivers and nodes are handled by the same
    reduce/trim steps as the main pipeline.
    """
    _check_request(g, m, r_size)
    return _run_pipeline(g, m, r_size, t_f, [r_size] * m, longest_first_trim=False)


def _check_request(g: DirectedGraph, m: int, r_size: int) -> None:
    if not (1 <= r_size <= g.n):
        raise ValueError(f"r_size must be in [1, {g.n}], got {r_size}")
    if not (1 <= m <= r_size):
        raise ValueError(f"m must be in [1, r_size], got {m}")


def _result_from_stems(
    g: DirectedGraph, stems: list[Stem], t_f: float, fallback: str | None, synthetic: bool
) -> EdcpResult:
    segments = tuple(tuple(seg) for stem in stems for seg in stem.segments if seg)
    drivers = [seg[0] for seg in segments]
    controlled = [v for seg in segments for v in seg]
    placement = ControlPlacement(drivers=tuple(drivers), controlled=tuple(controlled), t_f=t_f)
    e_estimate = float(sum(chain_control_cost(len(seg), t_f) for seg in segments))
    e_exact = None
    if g.n <= EXACT_EVAL_THRESHOLD:
        weighted = any(w != 1.0 for _, _, w in g.edges)
        a = g.adjacency() if weighted else g.randomized_adjacency()
        try:
            e_exact = control_cost(a, placement)
        except UncontrollableError:
            e_exact = None
    return EdcpResult(
        placement=placement,
        segments=segments,
        e_estimate=e_estimate,
        e_exact=e_exact,
        fallback=fallback,
        synthetic_host=synthetic,
    )
