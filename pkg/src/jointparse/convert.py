"""Merge discourse trees with constituency trees into joint trees.

The conversion has three steps: turn the discourse tree into a skeleton
whose leaves are EDU placeholders, align each EDU's text against the
constituency-tree tokens, then splice the covering constituency subtrees in
place of the EDU leaves.  Brackets that cross EDU boundaries do not survive;
when one EDU covers several maximal subtrees they are regrouped under a new
node labeled with their lowest common ancestor's category.
"""

from dataclasses import dataclass, field

from . import ptb
from .rst import SATELLITE, RstLeaf, RstTree, read_rst
from .trees import (
    MULTI_NUCLEAR,
    NUCLEUS_THEN_SATELLITE,
    SATELLITE_THEN_NUCLEUS,
    DiscourseLabel,
    EduSpan,
    Internal,
    JointTree,
    Leaf,
    SyntacticLabel,
    leaf_tokens,
    span_of,
    validate_tree,
)


class AlignmentError(ValueError):
    """EDU text cannot be matched against the constituency tokenization."""


@dataclass
class SkeletonLeaf:
    edu_index: int
    text: str


@dataclass
class SkeletonNode:
    label: DiscourseLabel
    children: list = field(default_factory=list)


Skeleton = SkeletonLeaf | SkeletonNode


def skeleton_edus(skeleton) -> list:
    """The skeleton's EDU leaves, in document order."""
    out = []

    def walk(node):
        if isinstance(node, SkeletonLeaf):
            out.append(node)
        else:
            for child in node.children:
                walk(child)

    walk(skeleton)
    return out


def convert_rst(rst: RstTree) -> Skeleton:
    """Relabel a discourse tree into a joint-tree skeleton.

    Binary nucleus/satellite nodes become directional relation labels with
    the arrow pointing from the satellite toward the nucleus; conjunctive
    nodes keep all their children under the bare relation name.
    """
    counter = [0]

    def walk(node):
        if isinstance(node, RstLeaf):
            leaf = SkeletonLeaf(counter[0], node.text)
            counter[0] += 1
            return leaf
        kinds = [c.nuclearity for c in node.children]
        if SATELLITE in kinds:
            satellite = node.children[kinds.index(SATELLITE)]
            form = (
                SATELLITE_THEN_NUCLEUS
                if kinds[0] == SATELLITE
                else NUCLEUS_THEN_SATELLITE
            )
            label = DiscourseLabel(satellite.relation, form)
        else:
            label = DiscourseLabel(node.children[0].relation, MULTI_NUCLEAR)
        return SkeletonNode(label, [walk(c) for c in node.children])

    return walk(rst.root)


# ---------------------------------------------------------------------------
# EDU alignment


def _normalize(word: str) -> str:
    return ptb.unescape_token(word)


def align_edus(edu_texts, tokens) -> list:
    """Match whitespace-split EDU texts against the token sequence.

    Matching is exact on bracket-unescaped strings.  Any mismatch means the
    two treebanks disagree on this document, which is dropped upstream.
    """
    spans = []
    pos = 0
    for index, text in enumerate(edu_texts):
        words = [_normalize(w) for w in text.split()]
        if not words:
            raise AlignmentError(f"EDU {index} has no tokens")
        start = pos
        for word in words:
            if pos >= len(tokens):
                raise AlignmentError(
                    f"EDU {index}: ran out of tokens while matching {word!r}"
                )
            if _normalize(tokens[pos].text) != word:
                raise AlignmentError(
                    f"EDU {index}: expected {word!r}, treebank has "
                    f"{tokens[pos].text!r} at token {pos}"
                )
            pos += 1
        spans.append(EduSpan(start, pos))
    if pos != len(tokens):
        raise AlignmentError(
            f"EDUs cover {pos} tokens but the treebank document has {len(tokens)}"
        )
    return spans


# ---------------------------------------------------------------------------
# splicing


def splice_edus(skeleton, ptb_trees) -> JointTree:
    """Replace each EDU leaf of the skeleton with its constituency content.

    An EDU matching a single maximal subtree keeps that subtree unchanged.
    An EDU covering several maximal subtrees gets a new cover node labeled
    with the category of their lowest common ancestor; whatever else that
    ancestor dominated lies outside the EDU and surfaces above the discourse
    node through its own EDU instead.
    """
    tokens = []
    for tree in ptb_trees:
        tokens.extend(leaf_tokens(tree))
    if [t.index for t in tokens] != list(range(len(tokens))):
        raise AlignmentError("constituency trees are not consecutively indexed")
    if not tokens:
        raise AlignmentError("no constituency tokens to splice")

    edus = skeleton_edus(skeleton)
    spans = align_edus([e.text for e in edus], tokens)
    subtree_by_edu = {
        e.edu_index: _edu_subtree(ptb_trees, span)
        for e, span in zip(edus, spans)
    }

    def build(node):
        if isinstance(node, SkeletonLeaf):
            return subtree_by_edu[node.edu_index]
        return Internal(node.label, [build(c) for c in node.children])

    tree = JointTree(tokens, build(skeleton))
    validate_tree(tree)
    return tree


def _edu_subtree(ptb_trees, span):
    pieces = []
    owners = []
    for root in ptb_trees:
        _collect_cover(root, span, root, pieces, owners)
    if not pieces:
        raise AlignmentError(f"no constituency material under {span}")
    if len(pieces) == 1:
        return pieces[0]
    if any(owner is not owners[0] for owner in owners):
        raise AlignmentError(
            f"EDU {span} crosses a sentence boundary; no common ancestor"
        )
    lca = _lowest_common_ancestor(owners[0], span)
    return Internal(SyntacticLabel(lca.label.name), pieces)


def _collect_cover(node, span, owner, pieces, owners):
    """Maximal nodes whose extent fits inside the span, in order."""
    start, end = _extent(node)
    if end <= span.start or start >= span.end:
        return
    if span.start <= start and end <= span.end:
        pieces.append(node)
        owners.append(owner)
        return
    if isinstance(node, Leaf):
        raise AlignmentError(f"token {node.token!r} straddles EDU {span}")
    for child in node.children:
        _collect_cover(child, span, owner, pieces, owners)


def _extent(node):
    if isinstance(node, Leaf):
        return node.token.index, node.token.index + 1
    return span_of(node)


def _lowest_common_ancestor(root, span):
    node = root
    while True:
        if isinstance(node, Leaf):
            raise AlignmentError(f"no internal node dominates {span}")
        narrower = None
        for child in node.children:
            start, end = _extent(child)
            if start <= span.start and span.end <= end:
                narrower = child
                break
        if narrower is None or isinstance(narrower, Leaf):
            return node
        node = narrower


# ---------------------------------------------------------------------------
# document pipeline and statistics


def convert_document(rst_text: str, ptb_text: str) -> JointTree:
    """Full conversion of one document from raw treebank texts."""
    skeleton = convert_rst(read_rst(rst_text))
    return splice_edus(skeleton, ptb.read_ptb(ptb_text))


@dataclass
class CorpusStats:
    trees: int
    tokens: int
    min_tokens: int | None
    max_tokens: int | None
    histogram: dict  # bucket start -> count
    bucket: int

    def to_dict(self):
        return {
            "trees": self.trees,
            "tokens": self.tokens,
            "min_tokens": self.min_tokens,
            "max_tokens": self.max_tokens,
            "bucket": self.bucket,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def corpus_stats(treebank, bucket: int = 100) -> CorpusStats:
    """Tree/token counts and a token-length histogram for a treebank."""
    lengths = [len(tree.tokens) for tree in treebank]
    histogram = {}
    for length in lengths:
        lo = (length // bucket) * bucket
        histogram[lo] = histogram.get(lo, 0) + 1
    return CorpusStats(
        trees=len(lengths),
        tokens=sum(lengths),
        min_tokens=min(lengths) if lengths else None,
        max_tokens=max(lengths) if lengths else None,
        histogram=histogram,
        bucket=bucket,
    )
