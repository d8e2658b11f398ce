"""Backward reachability over priced configurations.

The decision procedure works on configurations (region, remaining budget).
Going backward, each inverted step adds its cost to the budget and anything
beyond the threshold is pruned, so the target basis carries budget 0 and
the query asks whether the initial configuration, carrying the full
threshold, lies above some discovered basis element.

Cheap steps (small delays and discrete firings) are inverted exactly under
the general ordering; the expensive near-one-time-unit delays are inverted
under the free ordering, whose monotonicity argument needs extra tokens to
sit in storage-free places. The alternation between the two is the outer
loop of `cost_threshold`. Its first stage is an exact fixpoint; later
stages would need reachability of sets that are not upward closed under the
general ordering, so they run on a bounded backward engine and the verdict
taxonomy (yes / no / unknown) records whether completeness was lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .model import PTPN, Place, Transition
from .order import (
    Basis,
    Configuration,
    Ordering,
    config_leq,
    insert_token_everywhere,
    minimize,
    region_embeds,
)
from .regions import (
    OMEGA,
    Mset,
    Region,
    abstract,
    class_sat,
    dec_mset_options,
    dec_word_options,
    fire_region_outcomes,
    mset,
    mset_sub,
    succ_B_all,
    succ_type1,
    succ_type2,
    token_cost,
)
from .semantics import (
    Computation,
    Delay,
    Fire,
    Marking,
    ReplayError,
    Step,
    _frac,
    is_delta_form,
    run,
    storage_rate,
)

Label = tuple  # ("type1",) | ("type2",) | ("type3",) | ("type4",) | ("fire", tid) | ("pad",)


@dataclass(frozen=True)
class Query:
    net: PTPN
    p_init: int
    p_fin: int
    v: int

    def __post_init__(self) -> None:
        if not (0 <= self.p_init < len(self.net.places) and 0 <= self.p_fin < len(self.net.places)):
            raise ValueError("query places out of range")
        if self.v < 0:
            raise ValueError("threshold must be a natural number")

    def initial(self) -> Configuration:
        return Configuration(Region((), ((self.p_init, 0),), ()), self.v)


@dataclass(frozen=True)
class SearchBounds:
    max_depth: int = 64
    max_tokens: int = 32
    max_configs: int = 100_000

    def __post_init__(self) -> None:
        # depth 0 is allowed: it turns the bounded engine into a no-op
        if self.max_depth < 0 or min(self.max_tokens, self.max_configs) <= 0:
            raise ValueError("bounds must be positive (depth may be zero)")


@dataclass(frozen=True)
class WitnessStep:
    label: Label
    target: Configuration  # obligation the step's successor must cover
    target_ordering: Ordering


@dataclass(frozen=True)
class Witness:
    start: Configuration  # basis element covered by the initial configuration
    start_ordering: Ordering
    steps: tuple[WitnessStep, ...]


@dataclass(frozen=True)
class Verdict:
    kind: str  # "yes" | "no" | "unknown"
    witness: Optional[Witness] = None
    exhausted: tuple[str, ...] = ()
    iterations: tuple[tuple[int, int, int], ...] = ()  # (k, |V_k|, |U_k|)

    @property
    def is_yes(self) -> bool:
        return self.kind == "yes"


@dataclass(frozen=True)
class OptResult:
    kind: str  # "infinite" | "value"
    value: Optional[int] = None
    exact: bool = True


class ResourceLimit(RuntimeError):
    """A configurable cap was hit; the caller should degrade to unknown."""


# ---------------------------------------------------------------------------
# Target set
# ---------------------------------------------------------------------------


def target_basis(net: PTPN, p_fin: int) -> Basis:
    """Minimal regions holding one final-place token, each with budget 0."""
    values = tuple(range(net.cmax + 1)) + (OMEGA,)
    configs = []
    for v in values:
        tok = (p_fin, v)
        configs.append(Configuration(Region((), (tok,), ()), 0))
        configs.append(Configuration(Region(((tok,),), (), ()), 0))
        configs.append(Configuration(Region((), (), ((tok,),)), 0))
    return Basis(tuple(sorted(configs, key=Configuration.key)), Ordering.ALL)


def _surplus_places(net: PTPN, ordering: Ordering) -> tuple[int, ...]:
    """Places whose tokens may appear above the embedded image of a cover."""
    if ordering is Ordering.FREE:
        return net.free_places()
    return tuple(p.id for p in net.places)


def _value_domain(net: PTPN) -> tuple[int, ...]:
    return tuple(range(net.cmax + 1)) + (OMEGA,)


# ---------------------------------------------------------------------------
# Inverse timed steps of type I and II
# ---------------------------------------------------------------------------


def pre_type1(net: PTPN, c: Configuration, ordering: Ordering = Ordering.ALL) -> set[Configuration]:
    """Configurations whose type I successor covers ``c`` (same budget).

    Either the leftmost low class is pulled back into the zero class, or the
    zero class of the predecessor is a surplus token that the cover absorbs.
    """
    r = c.region
    if r.zero:
        return set()
    out: set[Configuration] = set()
    if r.low:
        out.add(Configuration(Region(r.high, r.low[0], r.low[1:]), c.budget))
    for p in _surplus_places(net, ordering):
        for v in _value_domain(net):
            out.add(Configuration(Region(r.high, ((p, v),), r.low), c.budget))
    return out


def pre_type2(net: PTPN, c: Configuration, ordering: Ordering = Ordering.ALL) -> set[Configuration]:
    """Configurations whose type II successor covers ``c`` (same budget)."""
    r = c.region
    out: set[Configuration] = set()
    if r.zero:
        for w in dec_mset_options(r.zero, net.cmax):
            out.add(Configuration(Region(r.high + (w,), (), r.low), c.budget))
    else:
        for p in _surplus_places(net, ordering):
            for v in _value_domain(net):
                out.add(Configuration(Region(r.high + (((p, v),),), (), r.low), c.budget))
    return out


# ---------------------------------------------------------------------------
# Inverse discrete step
# ---------------------------------------------------------------------------


def _token_positions(r: Region) -> list[tuple[str, int, tuple[int, int]]]:
    positions: list[tuple[str, int, tuple[int, int]]] = []
    for i, ms in enumerate(r.high):
        positions.extend(("H", i, tok) for tok in set(ms))
    positions.extend(("Z", -1, tok) for tok in set(r.zero))
    for i, ms in enumerate(r.low):
        positions.extend(("L", i, tok) for tok in set(ms))
    return positions


def _class_of(r: Region, part: str, idx: int) -> Mset:
    if part == "H":
        return r.high[idx]
    if part == "Z":
        return r.zero
    return r.low[idx]


def _remove_positions(r: Region, removed: Iterable[tuple[str, int, tuple[int, int]]]) -> Region:
    high = [list(ms) for ms in r.high]
    zero = list(r.zero)
    low = [list(ms) for ms in r.low]
    for part, idx, tok in removed:
        (high[idx] if part == "H" else zero if part == "Z" else low[idx]).remove(tok)
    return Region(
        tuple(mset(ms) for ms in high if ms),
        mset(zero),
        tuple(mset(ms) for ms in low if ms),
    )


def _output_matchings(net: PTPN, r: Region, tr: Transition, ordering: Ordering):
    """Partial matchings of output arcs against compatible tokens of ``r``.

    Unmatched produced tokens are surplus in the covering successor; under
    the free ordering they must land in free places, so a cost-place output
    arc has to be matched.
    """
    positions = _token_positions(r)
    results: set[tuple] = set()

    def pick(i: int, chosen: tuple):
        if i == len(tr.outputs):
            results.add(tuple(sorted(t for t in chosen if t is not None)))
            return
        pid, interval = tr.outputs[i]
        if ordering is Ordering.ALL or net.place_cost(pid) == 0:
            pick(i + 1, chosen + (None,))
        for part, idx, tok in positions:
            if tok[0] != pid or not class_sat(part, tok[1], interval):
                continue
            used = sum(1 for ch in chosen if ch == (part, idx, tok))
            if used >= _class_of(r, part, idx).count(tok):
                continue
            pick(i + 1, chosen + ((part, idx, tok),))

    pick(0, ())
    return sorted(results)


def _insert_arc_tokens(net: PTPN, r: Region, arcs) -> set[Region]:
    """All ways to add one interval-compatible token per arc to ``r``."""
    states = {r}
    for pid, interval in arcs:
        nxt: set[Region] = set()
        for state in states:
            for v in _value_domain(net):
                tok = (pid, v)
                if class_sat("Z", v, interval):
                    nxt.add(Region(state.high, mset(state.zero + (tok,)), state.low))
                for part, attr in (("H", "high"), ("L", "low")):
                    if not class_sat(part, v, interval):
                        continue
                    word = getattr(state, attr)
                    for i in range(len(word)):
                        joined = word[:i] + (mset(word[i] + (tok,)),) + word[i + 1 :]
                        nxt.add(_with_word(state, attr, joined))
                    for gap in range(len(word) + 1):
                        fresh = word[:gap] + ((tok,),) + word[gap:]
                        nxt.add(_with_word(state, attr, fresh))
        states = nxt
    return states


def _with_word(r: Region, attr: str, word) -> Region:
    parts = {"high": r.high, "zero": r.zero, "low": r.low}
    parts[attr] = word
    return Region(parts["high"], parts["zero"], parts["low"])


def pre_discrete(
    net: PTPN,
    tid: int,
    c: Configuration,
    v: int,
    ordering: Ordering = Ordering.ALL,
) -> set[Configuration]:
    """Minimal configurations whose firing of ``tid`` covers ``c``.

    Matched output tokens are deleted from the cover, input tokens are
    re-inserted at every compatible position, and the budget grows by the
    firing cost (candidates beyond the threshold are dropped).
    """
    tr = net.transitions[tid]
    budget = c.budget + tr.cost
    if budget > v:
        return set()
    candidates: set[Configuration] = set()
    for matching in _output_matchings(net, c.region, tr, ordering):
        mid = _remove_positions(c.region, matching)
        for r2 in _insert_arc_tokens(net, mid, tr.inputs):
            candidates.add(Configuration(r2, budget))
    return set(minimize(net, candidates, ordering).elements)


def pre_A_labeled(
    net: PTPN, c: Configuration, v: int, ordering: Ordering = Ordering.ALL
) -> list[tuple[Configuration, Label]]:
    """Inverse type I/II and discrete steps, minimized together."""
    found: list[tuple[Configuration, Label]] = []
    for c2 in pre_type1(net, c, ordering):
        found.append((c2, ("type1",)))
    for c2 in pre_type2(net, c, ordering):
        found.append((c2, ("type2",)))
    for tr in net.transitions:
        for c2 in pre_discrete(net, tr.id, c, v, ordering):
            found.append((c2, ("fire", tr.id)))
    keep = set(minimize(net, (cfg for cfg, _ in found), ordering).elements)
    seen: set[Configuration] = set()
    out = []
    for cfg, label in sorted(found, key=lambda cl: (cl[0].key(), cl[1])):
        if cfg in keep and cfg not in seen:
            seen.add(cfg)
            out.append((cfg, label))
    return out


def pre_A(net: PTPN, c: Configuration, v: int, ordering: Ordering = Ordering.ALL) -> set[Configuration]:
    return {cfg for cfg, _ in pre_A_labeled(net, c, v, ordering)}


# ---------------------------------------------------------------------------
# Inverse expensive delays (type III / IV)
# ---------------------------------------------------------------------------


def _high_splits(high):
    """Splits H = Hx · Hy · Hz with Hy at most one class."""
    for i in range(len(high) + 1):
        yield high[:i], None, high[i:]
        if i < len(high):
            yield high[:i], high[i], high[i + 1 :]


def pre_B_labeled(
    net: PTPN, c: Configuration, v: int, ordering: Ordering = Ordering.FREE
) -> list[tuple[Configuration, Label]]:
    """Inverse type III/IV steps of everything covering ``c``.

    The predecessor carries the same tokens as the cover (values shifted
    down where the step crossed an integer), so the step cost equals the
    cover's token cost; budgets beyond the threshold are dropped.
    """
    r = c.region
    cost = token_cost(net, r)
    budget = c.budget + cost
    if budget > v:
        return []
    cmax = net.cmax
    found: list[tuple[Configuration, Label]] = []
    low_opts = dec_word_options(r.low, cmax)
    for hx, hy, hz in _high_splits(r.high):
        zero1 = hy if hy is not None else ()
        for h1 in dec_word_options(hx, cmax):
            for b in low_opts:
                if not r.zero:
                    # Type III: nothing lands on an integer.
                    found.append(
                        (Configuration(Region(h1, zero1, hz + b), budget), ("type3",))
                    )
                else:
                    # Type IV: the landed class is the cover's zero class.
                    for m in dec_mset_options(r.zero, cmax):
                        found.append(
                            (
                                Configuration(Region(h1, zero1, hz + (m,) + b), budget),
                                ("type4",),
                            )
                        )
    keep = set(minimize(net, (cfg for cfg, _ in found), ordering).elements)
    seen: set[Configuration] = set()
    out = []
    for cfg, label in sorted(found, key=lambda cl: (cl[0].key(), cl[1])):
        if cfg in keep and cfg not in seen:
            seen.add(cfg)
            out.append((cfg, label))
    return out


def pre_B(net: PTPN, c: Configuration, v: int, ordering: Ordering = Ordering.FREE) -> set[Configuration]:
    return {cfg for cfg, _ in pre_B_labeled(net, c, v, ordering)}


# ---------------------------------------------------------------------------
# Backward engines
# ---------------------------------------------------------------------------

Parents = dict[Configuration, tuple[Label, Configuration, Ordering]]


@dataclass
class EngineResult:
    basis: Basis
    exhausted: tuple[str, ...]


def _backward_engine(
    net: PTPN,
    start: Basis,
    pre: Callable[[Configuration], list[tuple[Configuration, Label]]],
    parents: Parents,
    max_depth: Optional[int] = None,
    max_tokens: Optional[int] = None,
    max_configs: Optional[int] = None,
) -> EngineResult:
    """Worklist saturation of min Pre*(↑start) with optional caps.

    Newly discovered minimal predecessors are inserted with domination
    pruning; parent pointers record one step from each discovered
    configuration to the configuration it was derived from. Caps make the
    result a sound under-approximation and are reported in ``exhausted``.
    """
    ordering = start.ordering
    basis: list[Configuration] = list(minimize(net, start.elements, ordering).elements)
    alive = set(basis)
    frontier = sorted(alive, key=Configuration.key)
    exhausted: set[str] = set()
    depth = 0
    while frontier:
        if max_depth is not None and depth >= max_depth:
            exhausted.add("depth")
            break
        nxt: list[Configuration] = []
        for c in sorted(frontier, key=Configuration.key):
            if c not in alive:
                continue
            for c2, label in pre(c):
                # predecessors sitting above their own target are subsumed
                if config_leq(net, c, c2, ordering):
                    continue
                if any(config_leq(net, b, c2, ordering) for b in basis):
                    continue
                if max_tokens is not None and c2.region.size() > max_tokens:
                    exhausted.add("tokens")
                    continue
                if max_configs is not None and len(basis) >= max_configs:
                    exhausted.add("configs")
                    break
                dominated = [b for b in basis if config_leq(net, c2, b, ordering)]
                for d in dominated:
                    alive.discard(d)
                basis = [b for b in basis if b not in dominated]
                basis.append(c2)
                alive.add(c2)
                parents.setdefault(c2, (label, c, ordering))
                nxt.append(c2)
            if "configs" in exhausted:
                break
        if "configs" in exhausted:
            break
        frontier = nxt
        depth += 1
    return EngineResult(
        Basis(tuple(sorted(basis, key=Configuration.key)), ordering),
        tuple(sorted(exhausted)),
    )


def acjt_fixpoint(
    net: PTPN,
    start: Basis,
    pre: Callable[[Configuration], Iterable[Configuration]],
    max_configs: Optional[int] = None,
) -> Basis:
    """Finite basis of Pre*(↑start) for a monotone ``pre`` (classic WQO loop).

    Raises ResourceLimit when the basis-size cap is hit.
    """
    parents: Parents = {}
    result = _backward_engine(
        net,
        start,
        lambda c: [(c2, ("pre",)) for c2 in sorted(pre(c), key=Configuration.key)],
        parents,
        max_configs=max_configs,
    )
    if result.exhausted:
        raise ResourceLimit(f"basis cap exceeded: {result.exhausted}")
    return result.basis


def bounded_pre_star(
    net: PTPN,
    targets: Basis,
    bounds: SearchBounds,
    v: int,
) -> tuple[Basis, bool]:
    """Bounded backward closure of the cheap-step relation under free covering.

    Returns the minimal configurations found and whether any bound was hit
    (in which case completeness, but not soundness, is lost).
    """
    parents: Parents = {}
    result = _backward_engine(
        net,
        targets,
        lambda c: pre_A_labeled(net, c, v, Ordering.FREE),
        parents,
        max_depth=bounds.max_depth,
        max_tokens=bounds.max_tokens,
        max_configs=bounds.max_configs,
    )
    return result.basis, bool(result.exhausted)


# ---------------------------------------------------------------------------
# Cost-Threshold
# ---------------------------------------------------------------------------


def _pad_b_targets(
    net: PTPN, configs: Iterable[Configuration], v: int, parents: Parents, limit: int
) -> tuple[list[Configuration], bool]:
    """Close a basis under adding affordable cost-place tokens.

    A predecessor of an expensive delay pays for every token it carries, so
    covers reached through such a step may hold extra cost-place tokens only
    while the total token cost stays within the remaining threshold. The
    spare allowance for a cover with budget u is v - u - token_cost.
    """
    out: dict[Configuration, None] = {}
    exhausted = False
    values = _value_domain(net)
    cost_tokens = [(p, val) for p in net.cost_places() for val in values]
    for f in sorted(set(configs), key=Configuration.key):
        allowance = v - f.budget - token_cost(net, f.region)
        if allowance < 0:
            continue
        out.setdefault(f)
        seen = {f.region}
        frontier = [(f.region, allowance)]
        while frontier:
            nxt = []
            for r, rest in frontier:
                for p, val in cost_tokens:
                    price = net.place_cost(p)
                    if price > rest:
                        continue
                    for r2 in insert_token_everywhere(r, (p, val)):
                        if r2 in seen:
                            continue
                        seen.add(r2)
                        padded = Configuration(r2, f.budget)
                        if padded not in out:
                            out.setdefault(padded)
                            parents.setdefault(padded, (("pad",), f, Ordering.ALL))
                        nxt.append((r2, rest - price))
                if len(out) > limit:
                    return list(out), True
            frontier = nxt
    return list(out), exhausted


def _chain_witness(
    net: PTPN, covered: Configuration, ordering: Ordering, parents: Parents
) -> Witness:
    steps: list[WitnessStep] = []
    cur = covered
    while cur in parents:
        label, nxt, ord_next = parents[cur]
        steps.append(WitnessStep(label, nxt, ord_next))
        cur = nxt
    return Witness(covered, ordering, tuple(steps))


def _covering_element(net: PTPN, init: Configuration, basis: Basis) -> Optional[Configuration]:
    for b in basis.elements:
        if config_leq(net, b, init, basis.ordering):
            return b
    return None


def cost_threshold(
    query: Query,
    bounds: SearchBounds = SearchBounds(),
    max_alternations: int = 64,
) -> Verdict:
    """Decide whether the final place is reachable within the cost threshold.

    Stage one saturates the cheap-step predecessors of the target exactly;
    paths without expensive delays are answered there. Then covers are
    padded with affordable cost tokens, expensive delays are inverted under
    free covering, and bounded cheap-step closures alternate with further
    inversions until the accumulated inversion basis stabilizes. A yes
    verdict always carries a replayable witness chain; no is only claimed
    when every stage closed without hitting a bound.
    """
    net, v = query.net, query.v
    init = query.initial()
    parents: Parents = {}
    exhausted: set[str] = set()
    iterations: list[tuple[int, int, int]] = []

    target = target_basis(net, query.p_fin)
    fix_a = _backward_engine(
        net,
        target,
        lambda c: pre_A_labeled(net, c, v, Ordering.ALL),
        parents,
        max_configs=bounds.max_configs,
    )
    exhausted.update(fix_a.exhausted)

    covered = _covering_element(net, init, fix_a.basis)
    if covered is not None:
        return Verdict(
            "yes",
            _chain_witness(net, covered, Ordering.ALL, parents),
            tuple(sorted(exhausted)),
            tuple(iterations),
        )

    padded, pad_exhausted = _pad_b_targets(
        net, fix_a.basis.elements, v, parents, bounds.max_configs
    )
    if pad_exhausted:
        exhausted.add("configs")
    v_basis = minimize(net, padded, Ordering.FREE)

    u_elems: list[tuple[Configuration, Label, Configuration]] = []
    for tgt in v_basis.elements:
        for cfg, label in pre_B_labeled(net, tgt, v, Ordering.FREE):
            u_elems.append((cfg, label, tgt))
    u_basis = minimize(net, (cfg for cfg, _, _ in u_elems), Ordering.FREE)
    for cfg, label, tgt in u_elems:
        if cfg in set(u_basis.elements):
            parents.setdefault(cfg, (label, tgt, Ordering.FREE))
    iterations.append((1, len(v_basis), len(u_basis)))

    for k in range(2, max_alternations + 2):
        covered = _covering_element(net, init, u_basis)
        if covered is not None:
            return Verdict(
                "yes",
                _chain_witness(net, covered, Ordering.FREE, parents),
                tuple(sorted(exhausted)),
                tuple(iterations),
            )
        vk = _backward_engine(
            net,
            u_basis,
            lambda c: pre_A_labeled(net, c, v, Ordering.FREE),
            parents,
            max_depth=bounds.max_depth,
            max_tokens=bounds.max_tokens,
            max_configs=bounds.max_configs,
        )
        exhausted.update(vk.exhausted)
        covered = _covering_element(net, init, vk.basis)
        if covered is not None:
            return Verdict(
                "yes",
                _chain_witness(net, covered, Ordering.FREE, parents),
                tuple(sorted(exhausted)),
                tuple(iterations),
            )
        new_elems: list[tuple[Configuration, Label, Configuration]] = []
        for tgt in vk.basis.elements:
            for cfg, label in pre_B_labeled(net, tgt, v, Ordering.FREE):
                new_elems.append((cfg, label, tgt))
        grown = minimize(
            net,
            tuple(cfg for cfg, _, _ in new_elems) + u_basis.elements,
            Ordering.FREE,
        )
        for cfg, label, tgt in new_elems:
            if cfg in set(grown.elements):
                parents.setdefault(cfg, (label, tgt, Ordering.FREE))
        iterations.append((k, len(vk.basis), len(grown)))
        if set(grown.elements) == set(u_basis.elements):
            u_basis = grown
            break
        u_basis = grown
    else:
        exhausted.add("alternations")

    covered = _covering_element(net, init, u_basis)
    if covered is not None:
        return Verdict(
            "yes",
            _chain_witness(net, covered, Ordering.FREE, parents),
            tuple(sorted(exhausted)),
            tuple(iterations),
        )
    kind = "no" if not exhausted else "unknown"
    return Verdict(kind, None, tuple(sorted(exhausted)), tuple(iterations))


# ---------------------------------------------------------------------------
# Coverability and Cost-Optimality
# ---------------------------------------------------------------------------


def _zero_cost_copy(net: PTPN) -> PTPN:
    places = tuple(Place(p.id, p.name, 0) for p in net.places)
    transitions = tuple(
        Transition(t.id, t.name, 0, t.inputs, t.outputs) for t in net.transitions
    )
    return PTPN(places, transitions)


def coverability(net: PTPN, p_init: int, p_fin: int) -> bool:
    """Plain (cost-free) coverability of the final place.

    With all costs zero the whole step relation is monotone under the
    general ordering, so a single exact fixpoint decides.
    """
    zeroed = _zero_cost_copy(net)
    init = Configuration(Region((), ((p_init, 0),), ()), 0)

    def pre(c: Configuration) -> list[tuple[Configuration, Label]]:
        out = list(pre_A_labeled(zeroed, c, 0, Ordering.ALL))
        out.extend(pre_B_labeled(zeroed, c, 0, Ordering.ALL))
        return out

    parents: Parents = {}
    result = _backward_engine(net=zeroed, start=target_basis(zeroed, p_fin), pre=pre, parents=parents)
    return _covering_element(zeroed, init, result.basis) is not None


def cost_optimal(
    net: PTPN,
    p_init: int,
    p_fin: int,
    bounds: SearchBounds = SearchBounds(),
    max_threshold: int = 1 << 16,
) -> OptResult:
    """Infimum cost of covering the final place: a natural number or ∞.

    Thresholds are tried in increasing order; a yes after nothing but no
    verdicts pins the infimum exactly, a yes after some unknown only bounds
    it from above.
    """
    if not coverability(net, p_init, p_fin):
        return OptResult("infinite")
    all_no = True
    for v in range(max_threshold + 1):
        verdict = cost_threshold(Query(net, p_init, p_fin, v), bounds)
        if verdict.kind == "yes":
            return OptResult("value", v, all_no)
        if verdict.kind != "no":
            verdict2 = forward_search(Query(net, p_init, p_fin, v), bounds)
            if verdict2.kind == "yes":
                return OptResult("value", v, all_no)
            all_no = False
    raise ResourceLimit(f"no yes verdict up to threshold {max_threshold}")


# ---------------------------------------------------------------------------
# Forward search (auxiliary witness finder; never answers no)
# ---------------------------------------------------------------------------


def forward_search(query: Query, bounds: SearchBounds = SearchBounds()) -> Verdict:
    """Explore the step relation forward with free-domination pruning."""
    net, v = query.net, query.v
    init = query.initial()

    def hits(region: Region) -> bool:
        return any(p == query.p_fin for p, _ in region.tokens())

    def witness_from(path: list[tuple[Label, Configuration]]) -> Witness:
        steps = tuple(
            WitnessStep(label, cfg, Ordering.FREE) for label, cfg in path
        )
        return Witness(init, Ordering.FREE, steps)

    if hits(init.region):
        return Verdict("yes", Witness(init, Ordering.FREE, ()))

    explored: list[Configuration] = [init]
    paths: dict[Configuration, list[tuple[Label, Configuration]]] = {init: []}
    frontier = [init]
    exhausted: set[str] = set()
    for _ in range(bounds.max_depth):
        if not frontier:
            break
        nxt: list[Configuration] = []
        for c in frontier:
            succs: list[tuple[Region, int, Label]] = []
            s1 = succ_type1(c.region)
            if s1 is not None:
                succs.append((s1, 0, ("type1",)))
            s2 = succ_type2(net, c.region)
            if s2 is not None:
                succs.append((s2, 0, ("type2",)))
            for tr in net.transitions:
                for outcome in fire_region_outcomes(net, c.region, tr.id):
                    succs.append((outcome.region, tr.cost, ("fire", tr.id)))
            for region, cost, label in succ_B_all(net, c.region):
                succs.append((region, cost, label[:1]))
            for region, cost, label in succs:
                budget = c.budget - cost
                if budget < 0:
                    continue
                if region.size() > bounds.max_tokens:
                    exhausted.add("tokens")
                    continue
                c2 = Configuration(region, budget)
                if any(config_leq(net, c2, e, Ordering.FREE) for e in explored):
                    continue
                path = paths[c] + [(label, c2)]
                if hits(region):
                    return Verdict("yes", witness_from(path), tuple(sorted(exhausted)))
                explored.append(c2)
                paths[c2] = path
                nxt.append(c2)
                if len(explored) >= bounds.max_configs:
                    exhausted.add("configs")
                    break
            if "configs" in exhausted:
                break
        if "configs" in exhausted:
            break
        frontier = nxt
    if frontier:
        exhausted.add("depth")
    return Verdict("unknown", None, tuple(sorted(exhausted)))


# ---------------------------------------------------------------------------
# Witness replay: symbolic chain -> concrete δ-form computation
# ---------------------------------------------------------------------------


def _region_path(net: PTPN, witness: Witness, init: Configuration) -> list[tuple[Label, Region]]:
    """Resolve the witness chain into an explicit region path from the start.

    Each chain step names a successor kind; monotonicity guarantees the
    current (larger) region has a successor of the same kind covering the
    next obligation. The concrete realization then follows the region path.
    """
    if not config_leq(net, witness.start, init, witness.start_ordering):
        raise ReplayError(0, "witness start does not cover the initial configuration")
    path: list[tuple[Label, Region]] = []
    region = init.region
    for step in witness.steps:
        label = step.label
        if label[0] == "pad":
            if not region_embeds(net, step.target.region, region, Ordering.ALL):
                raise ReplayError(len(path), "pad obligation not covered")
            continue
        candidates: list[Region] = []
        if label[0] == "type1":
            s = succ_type1(region)
            candidates = [s] if s is not None else []
        elif label[0] == "type2":
            s = succ_type2(net, region)
            candidates = [s] if s is not None else []
        elif label[0] in ("type3", "type4"):
            kind = label[0]
            candidates = [
                r for r, _, lab in succ_B_all(net, region) if lab[0] == kind
            ]
        elif label[0] == "fire":
            candidates = sorted(
                {o.region for o in fire_region_outcomes(net, region, label[1])},
                key=Region.key,
            )
        else:
            raise ReplayError(len(path), f"unknown witness label {label!r}")
        chosen = None
        for cand in candidates:
            if region_embeds(net, step.target.region, cand, step.target_ordering):
                chosen = cand
                break
        if chosen is None:
            raise ReplayError(len(path), f"no {label} successor covers the obligation")
        path.append((label, chosen))
        region = chosen
    return path


def _group_fracs(m: Marking) -> tuple[list[Fraction], list[Fraction]]:
    """Sorted distinct high and low positive fractional parts of a marking."""
    fracs = {_frac(a) for _, a in m.tokens}
    lows = sorted(f for f in fracs if 0 < f < Fraction(1, 2))
    highs = sorted(f for f in fracs if f >= Fraction(1, 2))
    return highs, lows


def _concrete_age(value: int, frac: Fraction, cmax: int) -> Fraction:
    base = cmax + 1 if value == OMEGA else value
    return base + frac


def _realize_fire(
    net: PTPN, m: Marking, region: Region, target: Region, tid: int, span: Fraction
) -> tuple[Marking, Fire]:
    """Concrete firing matching a chosen symbolic outcome.

    Consumed tokens are taken from the concrete classes aligned with the
    region; produced tokens join the fractional part of their class, or get
    a fresh fractional part squeezed between neighbours for new classes.
    """
    outcome = None
    for o in fire_region_outcomes(net, region, tid):
        if o.region == target:
            outcome = o
            break
    if outcome is None:
        raise ReplayError(-1, "symbolic firing outcome disappeared")
    cmax = net.cmax
    highs, lows = _group_fracs(m)

    def class_frac(part: str, idx: int) -> Fraction:
        return Fraction(0) if part == "Z" else (highs[idx] if part == "H" else lows[idx])

    consumed: list[tuple[int, Fraction]] = []
    for part, idx, (p, val) in outcome.consumed:
        frac = class_frac(part, idx)
        age = None
        for q, a in m.tokens:
            if q == p and _frac(a) == frac and value_of_age(a, cmax) == val:
                if consumed.count((q, a)) < _count_token(m, q, a):
                    age = a
                    break
        if age is None:
            raise ReplayError(-1, "consumed token missing in concrete marking")
        consumed.append((p, age))

    # Fractional parts for every class of the successor, fresh ones for new
    # classes, chosen strictly between their neighbours inside the span.
    def assign(plan, survivors_fracs, window_lo, window_hi):
        fracs: list[Optional[Fraction]] = [
            survivors_fracs[origin] if origin is not None else None
            for _, origin in plan
        ]
        for i, f in enumerate(fracs):
            if f is not None:
                continue
            lo = window_lo
            for j in range(i - 1, -1, -1):
                if fracs[j] is not None:
                    lo = fracs[j]
                    break
            hi = window_hi
            for j in range(i + 1, len(fracs)):
                if fracs[j] is not None:
                    hi = fracs[j]
                    break
            fracs[i] = lo + (hi - lo) / 2
        return fracs

    produced: list[tuple[int, Fraction]] = []
    survivors = _remove_positions_marking(m, consumed)

    for plan, part, window in (
        (outcome.high_plan, "H", (Fraction(1) - span, Fraction(1))),
        (outcome.low_plan, "L", (Fraction(0), span)),
    ):
        source = highs if part == "H" else lows
        fracs = assign(plan, source, window[0], window[1])
        for (ms, origin), frac in zip(plan, fracs):
            if origin is not None:
                survivor_ms = _post_consumption_class(region, outcome.consumed, part, origin)
                new_tokens = mset_sub(ms, survivor_ms)
            else:
                new_tokens = ms
            produced.extend((p, _concrete_age(val, frac, cmax)) for p, val in new_tokens)
    produced.extend(
        (p, _concrete_age(val, Fraction(0), cmax)) for p, val in outcome.zero_added
    )
    fire = Fire(tid, Marking.of(consumed), Marking.of(produced))
    return survivors.add(fire.produced), fire


def value_of_age(age: Fraction, cmax: int) -> int:
    if age >= cmax + 1:
        return OMEGA
    return age.numerator // age.denominator


def _count_token(m: Marking, p: int, a: Fraction) -> int:
    return sum(1 for q, b in m.tokens if q == p and b == a)


def _remove_positions_marking(m: Marking, tokens: list[tuple[int, Fraction]]) -> Marking:
    rest = list(m.tokens)
    for tok in tokens:
        rest.remove(tok)
    return Marking(tuple(sorted(rest)))


def _post_consumption_class(
    region: Region, consumed, part: str, idx: int
) -> Mset:
    removed = [tok for p, i, tok in consumed if (p, i) == (part, idx)]
    cls = list(region.high[idx] if part == "H" else region.low[idx])
    for tok in removed:
        cls.remove(tok)
    return mset(cls)


def replay_witness(
    net: PTPN, witness: Witness, query: Query, delta: Fraction = Fraction(1, 1000)
) -> tuple[Computation, Fraction]:
    """Realize a symbolic witness as a concrete δ-form computation.

    Small delays are chosen inside a geometrically shrinking window so the
    fractional spread never exceeds δ; expensive delays land or cross the
    integer grid exactly where the region path dictates. The result is
    validated by a full replay and must be violation-free; its cost is at
    most v plus δ times the number of timed steps times the peak storage
    rate.
    """
    init = query.initial()
    path = _region_path(net, witness, init)
    timed = sum(1 for label, _ in path if label[0] != "fire")
    # Window budget after timed step k: delta / 2^(K-k+1); doubles each step.
    budget0 = Fraction(delta) / (1 << (timed + 1))

    m = Marking.of([(query.p_init, 0)])
    region = init.region
    steps: list[Step] = []
    total = Fraction(0)
    k = 0
    for label, target in path:
        highs, lows = _group_fracs(m)
        span = budget0 * (1 << k)
        if label[0] == "fire":
            m, fire = _realize_fire(net, m, region, target, label[1], span)
            steps.append(fire)
            total += net.transitions[label[1]].cost
        else:
            k += 1
            cap = budget0 * (1 << k)
            if label[0] == "type1":
                room = [cap - (lows[-1] if lows else 0)]
                if lows:
                    room.append(lows[0])
                if highs:
                    room.append(1 - highs[-1])
                d = min(room) / 2
            elif label[0] == "type2":
                d = 1 - highs[-1]
            elif label[0] == "type3":
                # target.low holds exactly the classes that cross.
                kept = len(region.low) - len(target.low)
                upper = lows[kept] if kept < len(lows) else cap
                lower = lows[kept - 1] if kept else Fraction(0)
                d = 1 - (lower + upper) / 2
            else:  # type4
                landed = len(region.low) - len(target.low) - 1
                d = 1 - lows[landed]
            if d <= 0:
                raise ReplayError(len(steps), f"no admissible delay for {label}")
            total += d * storage_rate(net, m)
            m = m.aged(d)
            steps.append(Delay(d))
        region = target
        if not is_delta_form(m, Fraction(delta)):
            raise ReplayError(len(steps) - 1, "marking left delta-form during replay")
        if abstract(net, m, Fraction(delta)) != region:
            raise ReplayError(len(steps) - 1, "concrete step does not match region path")

    computation = Computation(Marking.of([(query.p_init, 0)]), tuple(steps))
    result = run(net, computation)
    if result.guard_violations:
        raise ReplayError(result.guard_violations[0][0], "witness replay violated a guard")
    if result.total_cost != total:
        raise ReplayError(0, "cost accounting mismatch in replay")
    peak_rate = max(
        [storage_rate(net, marking) for marking in _markings_along(net, computation)],
        default=0,
    )
    if total > query.v + Fraction(delta) * timed * peak_rate:
        raise ReplayError(0, "replay cost exceeds the threshold slack bound")
    return computation, total


def _markings_along(net: PTPN, computation: Computation):
    m = computation.initial
    yield m
    for step in computation.steps:
        if isinstance(step, Delay):
            m = m.aged(step.d)
        else:
            m = m.remove(step.consumed).add(step.produced)
        yield m
