"""Span-based shift/combine/label transition system with oracles.

The parser state is a strictly increasing list of boundary indices starting
``[-1, 0]``; adjacent boundaries delimit the spans on the stack, and the pair
``(-1, 0)`` is a sentinel that never combines with anything.  Structural
actions (shift, combine) alternate with labeling actions (a label chain or
no-label); the split point of the most recently built span is retained as
``midpoint`` until the labeling action consumes it, so the phase is readable
off the state without a step counter.  A shifted width-1 span keeps its left
boundary as a degenerate midpoint so three-argument label scoring stays
well-defined.

Terminal states have boundaries ``[-1, 0, n]`` and no midpoint.  The final
labeling of the full span ``(0, n)`` must pick a real label (no-label is
masked there), so every finished derivation yields a rooted tree.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .trees import (
    EDU_PLACEHOLDER,
    Internal,
    JointTree,
    LabeledSpan,
    Leaf,
    Token,
    is_discourse_chain,
    labeled_spans,
    parse_chain,
    spans_tile,
)

SHIFT = "shift"
COMBINE = "combine"
LABEL = "label"
NO_LABEL = "nolabel"

STRUCTURAL = "structural"
LABELING = "labeling"


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class Action:
    kind: str
    chain: str | None = None

    def mnemonic(self) -> str:
        if self.kind == SHIFT:
            return "SH"
        if self.kind == COMBINE:
            return "CB"
        if self.kind == NO_LABEL:
            return "NL"
        return f"L:{self.chain}"


SHIFT_ACTION = Action(SHIFT)
COMBINE_ACTION = Action(COMBINE)
NO_LABEL_ACTION = Action(NO_LABEL)


def label_action(chain: str) -> Action:
    return Action(LABEL, chain)


def format_actions(actions) -> str:
    return " ".join(a.mnemonic() for a in actions)


def parse_actions(text: str) -> list:
    out = []
    for word in text.split():
        if word == "SH":
            out.append(SHIFT_ACTION)
        elif word == "CB":
            out.append(COMBINE_ACTION)
        elif word == "NL":
            out.append(NO_LABEL_ACTION)
        elif word.startswith("L:"):
            out.append(label_action(word[2:]))
        else:
            raise TransitionError(f"unknown action mnemonic {word!r}")
    return out


@dataclass(frozen=True)
class ParserState:
    n: int
    boundaries: tuple = (-1, 0)
    midpoint: int | None = None
    labeled: frozenset = field(default_factory=frozenset)
    score: float = 0.0

    @property
    def top(self):
        """(i, j) extent of the top span."""
        return self.boundaries[-2], self.boundaries[-1]

    @property
    def frontier(self) -> int:
        return self.boundaries[-1]


def axiom(n: int) -> ParserState:
    if n < 1:
        raise TransitionError("cannot parse an empty document")
    return ParserState(n=n)


def is_terminal(state: ParserState) -> bool:
    return (
        state.midpoint is None
        and len(state.boundaries) == 3
        and state.boundaries[-1] == state.n
    )


def phase(state: ParserState) -> str:
    if is_terminal(state):
        raise TransitionError("terminal state has no phase")
    return LABELING if state.midpoint is not None else STRUCTURAL


def is_root_span(state: ParserState) -> bool:
    return state.top == (0, state.n)


def legal_actions(state: ParserState, chains=()) -> set:
    """Legal actions; `chains` supplies the label inventory for label phases."""
    if is_terminal(state):
        raise TransitionError("no legal actions in a terminal state")
    if state.midpoint is None:
        out = set()
        if state.frontier < state.n:
            out.add(SHIFT_ACTION)
        if len(state.boundaries) >= 4:
            out.add(COMBINE_ACTION)
        return out
    out = {label_action(chain) for chain in chains}
    if not is_root_span(state):
        out.add(NO_LABEL_ACTION)
    return out


def apply_action(state: ParserState, action: Action, score_delta: float = 0.0):
    """The successor state; raises on actions illegal in this state."""
    if is_terminal(state):
        raise TransitionError(f"cannot {action.kind} in a terminal state")
    structural = state.midpoint is None
    score = state.score + score_delta
    if action.kind == SHIFT:
        if not structural:
            raise TransitionError("shift during a labeling phase")
        j = state.frontier
        if j >= state.n:
            raise TransitionError("shift past the end of the document")
        return replace(
            state, boundaries=state.boundaries + (j + 1,), midpoint=j, score=score
        )
    if action.kind == COMBINE:
        if not structural:
            raise TransitionError("combine during a labeling phase")
        if len(state.boundaries) < 4:
            raise TransitionError("combine needs two spans above the sentinel")
        k = state.boundaries[-2]
        return replace(
            state,
            boundaries=state.boundaries[:-2] + state.boundaries[-1:],
            midpoint=k,
            score=score,
        )
    if structural:
        raise TransitionError(f"{action.kind} during a structural phase")
    if action.kind == LABEL:
        if not action.chain:
            raise TransitionError("label action without a chain")
        i, j = state.top
        span = LabeledSpan(i, j, action.chain)
        return replace(
            state, midpoint=None, labeled=state.labeled | {span}, score=score
        )
    if action.kind == NO_LABEL:
        if is_root_span(state):
            raise TransitionError("the full-document span must be labeled")
        return replace(state, midpoint=None, score=score)
    raise TransitionError(f"unknown action kind {action.kind!r}")


def replay(n: int, actions) -> ParserState:
    state = axiom(n)
    for action in actions:
        state = apply_action(state, action)
    return state


def validate_state(state: ParserState) -> None:
    """Sanity checks for the state invariants (used by tests and verifiers)."""
    b = state.boundaries
    if b[0] != -1 or b[1] != 0 or list(b) != sorted(set(b)) or b[-1] > state.n:
        raise TransitionError(f"bad boundary list {b}")
    if state.midpoint is not None:
        i, j = state.top
        shifted_mark = state.midpoint == i and j == i + 1
        if not (i < state.midpoint < j or shifted_mark):
            raise TransitionError(
                f"midpoint {state.midpoint} outside the top span ({i}, {j})"
            )


# ---------------------------------------------------------------------------
# oracles


def _gold_map(gold_spans) -> dict:
    if isinstance(gold_spans, dict):
        return gold_spans
    return {(s.start, s.end): s.chain for s in gold_spans}


def static_oracle(gold: JointTree) -> list:
    """The canonical derivation of a gold tree: left-to-right post-order,
    combining eagerly, with no-label at the internal merge points of nodes
    with more than two children (no binarization happens anywhere)."""
    if isinstance(gold.root, Leaf):
        raise TransitionError("gold tree must have a labeled root")
    gold_map = _gold_map(labeled_spans(gold))
    n = len(gold.tokens)
    children = _laminar_children(gold_map, n)
    actions = []

    def label_or_skip(extent):
        chain = gold_map.get(extent)
        actions.append(label_action(chain) if chain else NO_LABEL_ACTION)

    def derive(extent):
        start, end = extent
        if end - start == 1:
            actions.append(SHIFT_ACTION)
            label_or_skip(extent)
            return
        parts = children[extent]
        derive(parts[0])
        for idx, part in enumerate(parts[1:], start=2):
            derive(part)
            actions.append(COMBINE_ACTION)
            if idx < len(parts):
                actions.append(NO_LABEL_ACTION)
            else:
                label_or_skip(extent)

    derive((0, n))
    return actions


def _laminar_children(gold_map, n: int) -> dict:
    """Maximal sub-extents for each gold extent, padded with width-1 pieces."""
    extents = sorted(gold_map, key=lambda e: (e[0], -e[1]))
    if (0, n) not in gold_map:
        raise TransitionError("gold spans lack a root-covering span")
    children = {}
    stack = []
    for extent in extents:
        while stack and stack[-1][1] <= extent[0]:
            stack.pop()
        if stack:
            if extent[1] > stack[-1][1]:
                raise TransitionError(f"crossing spans {stack[-1]} and {extent}")
            children.setdefault(stack[-1], []).append(extent)
        stack.append(extent)
    # Fill uncovered positions with width-1 pieces and sort each child list.
    out = {}
    for extent in extents:
        if extent[1] - extent[0] == 1:
            continue
        parts = sorted(children.get(extent, []))
        filled = []
        pos = extent[0]
        for part in parts:
            filled.extend((q, q + 1) for q in range(pos, part[0]))
            filled.append(part)
            pos = part[1]
        filled.extend((q, q + 1) for q in range(pos, extent[1]))
        out[extent] = filled
    return out


def reachable_count(state: ParserState, gold_spans) -> int:
    """How many not-yet-labeled gold spans a completion could still build.

    A span can only be created with its right boundary at the frontier, so a
    gold span (l, r) survives iff r lies at or beyond the frontier and l is
    still (or will become) an available boundary; during a labeling phase the
    top span itself is also still winnable.
    """
    gold_map = _gold_map(gold_spans)
    i, j = state.top
    bset = set(state.boundaries)
    count = 0
    for (l, r), chain in gold_map.items():
        if LabeledSpan(l, r, chain) in state.labeled:
            continue
        if (r > j and (l in bset or l >= j)) or (r == j and l in bset and l < i):
            count += 1
    if state.midpoint is not None:
        chain = gold_map.get((i, j))
        if chain is not None and LabeledSpan(i, j, chain) not in state.labeled:
            count += 1
    return count


def dynamic_oracle(state: ParserState, gold_spans) -> set:
    """The set of actions that preserve the maximum number of reachable
    gold spans from this state (never empty)."""
    gold_map = _gold_map(gold_spans)
    if is_terminal(state):
        raise TransitionError("terminal state needs no oracle")
    if state.midpoint is not None:
        chain = gold_map.get(state.top)
        if chain is not None:
            return {label_action(chain)}
        if is_root_span(state):
            raise TransitionError("gold spans lack a root-covering span")
        return {NO_LABEL_ACTION}
    candidates = legal_actions(state)
    scored = {
        action: reachable_count(apply_action(state, action), gold_map)
        for action in candidates
    }
    best = max(scored.values())
    return {action for action, value in scored.items() if value == best}


# ---------------------------------------------------------------------------
# tree assembly


def reconstruct(labeled, tokens) -> JointTree:
    """Materialize a laminar labeled-span set as a tree over the tokens.

    Chains expand back into unary paths; positions not covered by any
    sub-span become bare token leaves.  The set must contain a span over
    the whole document (legal derivations always produce one).
    """
    tokens = [
        t if isinstance(t, Token) else Token(i, t) for i, t in enumerate(tokens)
    ]
    n = len(tokens)
    spans = sorted(labeled, key=lambda s: (s.start, -s.end))
    for first, second in zip(spans, spans[1:]):
        if first.start == second.start and first.end == second.end:
            raise TransitionError(
                f"duplicate extent ({first.start}, {first.end}) in the span set"
            )
    if not spans or (spans[0].start, spans[0].end) != (0, n):
        raise TransitionError("span set lacks a root-covering span")

    def build(span):
        nonlocal pos
        children = []
        cursor = span.start
        while cursor < span.end:
            if pos < len(spans) and spans[pos].start == cursor:
                child = spans[pos]
                if child.end > span.end:
                    raise TransitionError(f"crossing spans {span} and {child}")
                pos += 1
                children.append(build(child))
                cursor = child.end
            else:
                children.append(Leaf(tokens[cursor]))
                cursor += 1
        labels = parse_chain(span.chain)
        node = Internal(labels[-1], children)
        for lab in reversed(labels[:-1]):
            node = Internal(lab, [node])
        return node

    pos = 1
    root = build(spans[0])
    if pos != len(spans):
        stray = spans[pos]
        raise TransitionError(f"span {stray} crosses the document structure")
    return JointTree(tokens, root)


# ---------------------------------------------------------------------------
# greedy decoding


def parse_greedy(scorer, words, edu_spans=None) -> JointTree:
    """Decode a document by always taking the highest-scoring legal action.

    `scorer` must provide ``prepare(words)``, ``structural(below, i, j)``
    returning raw (shift, combine) scores, ``labels(i, k, j)`` returning raw
    scores over the label inventory (no-label first), and ``inventory()``
    returning that inventory as a list whose first element is None.

    With `edu_spans`, decoding is constrained to gold segmentation: shifting
    advances one whole EDU (its internal labeling is fixed to a placeholder),
    and only discourse relations may label the spans built above EDUs.
    """
    scorer.prepare(words)
    chains = scorer.inventory()
    if chains[0] is not None:
        raise TransitionError("label inventory must start with the no-label slot")

    if edu_spans is None:
        unit_bounds = list(range(len(words) + 1))
        allowed = np.ones(len(chains), dtype=bool)
    else:
        edu_spans = list(edu_spans)
        if not spans_tile(edu_spans, len(words)):
            raise TransitionError("EDU spans do not tile the document")
        unit_bounds = [span.start for span in edu_spans] + [len(words)]
        allowed = np.array(
            [c is None or is_discourse_chain(c) for c in chains], dtype=bool
        )

    def to_tokens(u):
        return -1 if u < 0 else unit_bounds[u]

    units = len(unit_bounds) - 1
    state = axiom(units)
    while not is_terminal(state):
        if state.midpoint is None:
            i, j = state.top
            can_shift = j < units
            can_combine = len(state.boundaries) >= 4
            raw = scorer.structural(
                to_tokens(state.boundaries[-3]) if can_combine else -1,
                to_tokens(i),
                to_tokens(j),
            )
            masked = np.where([can_shift, can_combine], raw, -np.inf)
            logp = masked - _logsumexp(masked)
            action = SHIFT_ACTION if int(np.argmax(logp)) == 0 else COMBINE_ACTION
            state = apply_action(state, action, float(np.max(logp)))
        else:
            i, j = state.top
            if edu_spans is not None and j - i == 1:
                # EDU-internal structure is not predicted in gold-EDU mode.
                state = apply_action(state, label_action(EDU_PLACEHOLDER))
                continue
            raw = scorer.labels(to_tokens(i), to_tokens(state.midpoint), to_tokens(j))
            if len(raw) != len(chains):
                raise TransitionError(
                    f"scorer emits {len(raw)} label scores for an inventory "
                    f"of {len(chains)}"
                )
            masked = np.where(allowed, raw, -np.inf)
            if is_root_span(state):
                masked[0] = -np.inf
            logp = masked - _logsumexp(masked)
            pick = int(np.argmax(logp))
            action = NO_LABEL_ACTION if pick == 0 else label_action(chains[pick])
            state = apply_action(state, action, float(logp[pick]))

    spans = state.labeled
    if edu_spans is not None:
        spans = {
            LabeledSpan(to_tokens(s.start), to_tokens(s.end), s.chain) for s in spans
        }
    return reconstruct(spans, list(words))


def _logsumexp(values):
    top = np.max(values)
    if not np.isfinite(top):
        raise TransitionError("no legal action has finite score")
    return top + np.log(np.sum(np.exp(values - top)))
