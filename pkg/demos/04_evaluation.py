"""The metric family, on a pair of trees that disagree in typical ways.

Discourse structure is scored at three nested levels: bare spans, spans
with nuclearity direction, and spans with direction plus relation, so the
three F1 numbers can only go down.  Labeled-span scores split the same
trees by layer instead.
"""

from jointparse.evaluate import discourse_metrics, segmentation_f1, span_prf
from jointparse.transition import reconstruct
from jointparse.trees import LabeledSpan, extract_edus

WORDS = "the market rallied while bond traders slept through it all".split()

GOLD = {
    LabeledSpan(0, 10, "<-Condition"),
    LabeledSpan(0, 3, "S"),
    LabeledSpan(0, 2, "NP"),
    LabeledSpan(3, 10, "S"),
    LabeledSpan(4, 6, "NP"),
    LabeledSpan(6, 10, "VP"),
}

# Same shape, but the direction is flipped and one phrase is mislabeled.
PRED = {
    LabeledSpan(0, 10, "Condition->"),
    LabeledSpan(0, 3, "S"),
    LabeledSpan(0, 2, "NP"),
    LabeledSpan(3, 10, "S"),
    LabeledSpan(4, 6, "ADJP"),
    LabeledSpan(6, 10, "VP"),
}


def main():
    gold = reconstruct(GOLD, WORDS)
    pred = reconstruct(PRED, WORDS)

    print("labeled-span scores by layer:")
    for level in ("syntactic", "discourse", "all"):
        r = span_prf(gold, pred, level)
        print(f"  {level:10s} P={r.precision:6.2f} R={r.recall:6.2f} F1={r.f1:6.2f}")
    print()

    print("discourse structure at the three strictness levels:")
    for name, r in discourse_metrics(gold, pred).items():
        print(f"  {name:10s} F1={r.f1:6.2f}")
    print("  (flipping an arrow keeps structure but loses the rest)")
    print()

    seg = segmentation_f1(extract_edus(gold), extract_edus(pred))
    print(f"segmentation F1={seg.f1:.2f} "
          "(same EDU boundaries on both sides here)")


if __name__ == "__main__":
    main()
