"""Parse with the segmentation given, predicting only discourse structure.

When gold EDUs are supplied, shifting advances one whole EDU at a time and
label decisions are restricted to discourse relations, all on the same
state machine and the same scorer as end-to-end parsing.  EDU-internal
syntax is not predicted; each EDU becomes a flat placeholder node.
"""

from jointparse import generate_treebank
from jointparse.evaluate import discourse_metrics
from jointparse.model import ModelConfig, SpanScorer
from jointparse.trainer import TrainConfig, train
from jointparse.transition import parse_greedy
from jointparse.trees import extract_edus
from jointparse.serialize import write_joint


def main():
    treebank = [
        tree
        for tree in generate_treebank("demo-goldedu", 16, max_tokens=16, max_edus=4)
        if len(extract_edus(tree)) >= 2
    ]
    config = TrainConfig(
        beta=1.0,
        dropout=0.0,
        epochs=25,
        seed=3,
        dev_size=0,
        learning_rate=8e-3,
        unk_replace=0.0,
        mode="goldedu",
    )
    result = train(
        treebank, config, ModelConfig(word_dim=24, hidden_dim=24, scorer_hidden=48)
    )
    print(f"relation F1 on the training documents: {result.best_f1:.2f}")
    print()

    scorer = SpanScorer(result.params, result.vocab)
    gold = treebank[0]
    pred = parse_greedy(
        scorer, [t.text for t in gold.tokens], edu_spans=extract_edus(gold)
    )
    print("gold:", write_joint(gold))
    print("pred:", write_joint(pred))
    print()
    for name, r in discourse_metrics(gold, pred).items():
        print(f"  {name:10s} F1={r.f1:6.2f}")


if __name__ == "__main__":
    main()
