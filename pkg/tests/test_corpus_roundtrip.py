"""Corpus-level conversion round trip on generated documents.

Each synthetic joint tree is decomposed into the two source annotations it
would have come from (a .dis discourse file and a bracketed constituency
file whose sentences group one or more EDUs), the directory pair is run
through the convert subcommand, and the converted treebank must equal the
originals tree for tree.
"""

import json
import random

from jointparse import cli, serialize
from jointparse.synthetic import generate_synthetic
from jointparse.trees import (
    MULTI_NUCLEAR,
    SATELLITE_THEN_NUCLEUS,
    DiscourseLabel,
    Internal,
    leaf_tokens,
)
from jointparse.ptb import escape_token


def edu_parts(tree):
    """Maximal constituency subtrees (the EDU contents), in order."""
    parts = []

    def walk(node):
        if isinstance(node, Internal) and isinstance(node.label, DiscourseLabel):
            for child in node.children:
                walk(child)
        else:
            parts.append(node)

    walk(tree.root)
    return parts


def count_edus(node):
    if isinstance(node, Internal) and isinstance(node.label, DiscourseLabel):
        return sum(count_edus(c) for c in node.children)
    return 1


def render_dis(tree):
    """Emit the discourse layer of a joint tree in the .dis layout."""
    next_leaf = [1]

    def leaf_clause(node):
        k = next_leaf[0]
        next_leaf[0] += 1
        text = " ".join(t.text for t in leaf_tokens(node))
        return f"(leaf {k})", f"(text _!{text}!_)"

    def walk(node, kind, relation):
        rel = "" if kind == "Root" else f" (rel2par {relation})"
        if not (isinstance(node, Internal) and isinstance(node.label, DiscourseLabel)):
            where, text = leaf_clause(node)
            return f"({kind} {where}{rel} {text})"
        label = node.label
        first = next_leaf[0]
        span = f"(span {first} {first + count_edus(node) - 1})"
        if label.form == MULTI_NUCLEAR:
            specs = [(c, "Nucleus", label.relation) for c in node.children]
        elif label.form == SATELLITE_THEN_NUCLEUS:
            specs = [
                (node.children[0], "Satellite", label.relation),
                (node.children[1], "Nucleus", "span"),
            ]
        else:
            specs = [
                (node.children[0], "Nucleus", "span"),
                (node.children[1], "Satellite", label.relation),
            ]
        inner = " ".join(walk(c, k, r) for c, k, r in specs)
        return f"({kind} {span}{rel} {inner})"

    return walk(tree.root, "Root", None)


def render_mrg(tree, rng):
    """Group the EDU contents into sentences and emit bracketed text.

    Multi-EDU sentences wrap their parts in an extra bracket, which the
    conversion must drop again (it spans discourse structure)."""

    def render(node):
        if isinstance(node, Internal):
            inner = " ".join(render(c) for c in node.children)
            return f"({node.label.name} {inner})"
        return escape_token(node.token.text)

    parts = edu_parts(tree)
    sentences = []
    pos = 0
    while pos < len(parts):
        width = min(rng.randint(1, 3), len(parts) - pos)
        group = parts[pos : pos + width]
        pos += width
        if len(group) == 1:
            sentences.append(f"( {render(group[0])} )")
        else:
            sentences.append(f"( (S {' '.join(render(p) for p in group)}) )")
    return "\n".join(sentences)


def test_synthetic_corpus_conversion_round_trip(tmp_path, capsys):
    rng = random.Random(20_240_717)
    rst_dir = tmp_path / "rst"
    ptb_dir = tmp_path / "ptb"
    rst_dir.mkdir()
    ptb_dir.mkdir()
    originals = []
    for k in range(12):
        tree = generate_synthetic(f"corpus-rt/{k}", max_tokens=20, max_edus=5)
        originals.append(tree)
        (rst_dir / f"doc{k:02d}.dis").write_text(render_dis(tree))
        (ptb_dir / f"doc{k:02d}.mrg").write_text(render_mrg(tree, rng))

    out = tmp_path / "converted.joint"
    code = cli.main([
        "convert", "--ptb", str(ptb_dir), "--rst", str(rst_dir),
        "--out", str(out), "--dropped", str(tmp_path / "dropped.txt"),
    ])
    stdout = capsys.readouterr().out
    assert code == 0
    stats = json.loads(stdout)["stats"]
    assert stats["trees"] == len(originals)
    assert stats["tokens"] == sum(len(t.tokens) for t in originals)
    assert (tmp_path / "dropped.txt").read_text() == ""

    converted = serialize.read_treebank(out)
    assert len(converted) == len(originals)
    for got, want in zip(converted, originals):
        assert got == want
