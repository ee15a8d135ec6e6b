"""Text format for joint trees, treebank files, and EDU segmentation files.

A tree is one bracketed line: ``(Background-> (S (NP (NNP Costa) ...``.
Treebank files hold one tree per blank-line-separated block.  Segmentation
files carry one document per line as space-separated ``start:end`` ranges.
"""

from .ptb import escape_token, unescape_token
from .trees import (
    EduSpan,
    Internal,
    JointTree,
    Leaf,
    Token,
    check_renderable,
    parse_label,
    spans_tile,
)


class JointParseError(ValueError):
    pass


def write_joint(tree: JointTree) -> str:
    """Render a joint tree as a single bracketed line."""

    def render(node):
        if isinstance(node, Leaf):
            return escape_token(node.token.text)
        check_renderable(node.label)
        inner = " ".join(render(c) for c in node.children)
        return f"({node.label.render()} {inner})"

    if isinstance(tree.root, Leaf):
        # A bare token has no bracketed form of its own.
        raise JointParseError("cannot serialize a tree whose root is a bare token")
    return render(tree.root)


def read_joint(text: str) -> JointTree:
    """Parse one bracketed block back into a joint tree."""
    tokens_out = []
    pos = 0
    text = text.strip()
    if not text:
        raise JointParseError("empty input")

    def skip_space(p):
        while p < len(text) and text[p].isspace():
            p += 1
        return p

    def atom(p):
        q = p
        while q < len(text) and not text[q].isspace() and text[q] not in "()":
            q += 1
        if q == p:
            raise JointParseError(f"expected a name at offset {p}")
        return text[p:q], q

    def node(p):
        p = skip_space(p)
        if p >= len(text) or text[p] != "(":
            raise JointParseError(f"expected '(' at offset {p}")
        p = skip_space(p + 1)
        raw_label, p = atom(p)
        try:
            label = parse_label(raw_label)
        except ValueError as exc:
            raise JointParseError(str(exc)) from exc
        children = []
        while True:
            p = skip_space(p)
            if p >= len(text):
                raise JointParseError("unbalanced '('")
            if text[p] == ")":
                p += 1
                break
            if text[p] == "(":
                child, p = node(p)
            else:
                word, p = atom(p)
                tok = Token(len(tokens_out), unescape_token(word))
                tokens_out.append(tok)
                child = Leaf(tok)
            children.append(child)
        if not children:
            raise JointParseError(f"constituent {raw_label!r} has no children")
        return Internal(label, children), p

    root, pos = node(0)
    pos = skip_space(pos)
    if pos != len(text):
        raise JointParseError(f"trailing material at offset {pos}")
    return JointTree(tokens_out, root)


# ---------------------------------------------------------------------------
# files


def write_treebank(trees, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for tree in trees:
            handle.write(write_joint(tree))
            handle.write("\n\n")


def read_treebank(path) -> list:
    with open(path, encoding="utf-8") as handle:
        return read_treebank_text(handle.read())


def read_treebank_text(text: str) -> list:
    trees = []
    for block in text.split("\n\n"):
        if block.strip():
            trees.append(read_joint(block))
    return trees


def write_segmentation(documents, path) -> None:
    """One line per document: space-separated ``start:end`` EDU ranges."""
    with open(path, "w", encoding="utf-8") as handle:
        for spans in documents:
            handle.write(" ".join(f"{s.start}:{s.end}" for s in spans))
            handle.write("\n")


def read_segmentation(path) -> list:
    documents = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            spans = []
            for part in line.split():
                try:
                    start, end = part.split(":")
                    spans.append(EduSpan(int(start), int(end)))
                except ValueError as exc:
                    raise JointParseError(
                        f"bad EDU range {part!r} on line {lineno}"
                    ) from exc
            if not spans_tile(spans, spans[-1].end):
                raise JointParseError(f"EDU ranges on line {lineno} do not tile")
            documents.append(spans)
    return documents
