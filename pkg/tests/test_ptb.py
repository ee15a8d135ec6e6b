import pytest

from jointparse.ptb import PtbParseError, read_ptb
from jointparse.trees import Internal, Leaf


def words(node):
    if isinstance(node, Leaf):
        return [node.token.text]
    return [w for child in node.children for w in words(child)]


def test_reads_document_in_order():
    trees = read_ptb("(S (NP (NNP Costa) (NNP Rica)) (VP (VBD had)))")
    assert len(trees) == 1
    assert words(trees[0]) == ["Costa", "Rica", "had"]
    assert [t.index for t in _tokens(trees[0])] == [0, 1, 2]


def _tokens(node):
    if isinstance(node, Leaf):
        return [node.token]
    return [t for child in node.children for t in _tokens(child)]


def test_minimal_tree():
    trees = read_ptb("(X a)")
    assert len(trees) == 1
    assert isinstance(trees[0], Internal)
    assert words(trees[0]) == ["a"]


def test_unbalanced_raises():
    with pytest.raises(PtbParseError):
        read_ptb("(S (NP a (b)")


def test_empty_constituent_raises():
    with pytest.raises(PtbParseError, match="empty constituent"):
        read_ptb("(S (NP ) (VP x))")


def test_wrapper_and_multiple_sentences_share_numbering():
    trees = read_ptb("( (S (X a) (Y b)) )\n( (S (Z c)) )")
    assert len(trees) == 2
    assert trees[0].label.name == "S"
    assert [t.index for tree in trees for t in _tokens(tree)] == [0, 1, 2]


def test_bracket_escapes_unescaped():
    trees = read_ptb("(S (-LRB- -LRB-) (NN word) (-RRB- -RRB-))")
    assert words(trees[0]) == ["(", "word", ")"]
    assert trees[0].children[0].label.name == "-LRB-"


def test_functional_tags_and_traces_stripped():
    text = "(S (NP-SBJ-1 (NNP Sue)) (VP (VBD ran) (NP (-NONE- *T*-1))))"
    trees = read_ptb(text)
    assert words(trees[0]) == ["Sue", "ran"]
    np_node = trees[0].children[0]
    assert np_node.label.name == "NP"
    vp_node = trees[0].children[1]
    assert len(vp_node.children) == 1  # the trace NP is pruned entirely
    assert [t.index for t in _tokens(trees[0])] == [0, 1]


def test_error_reports_position():
    with pytest.raises(PtbParseError, match="line 2"):
        read_ptb("(S (NN a))\n(S (NN b)")
