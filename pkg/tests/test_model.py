import numpy as np
import pytest

from jointparse.model import (
    LabelStep,
    ModelConfig,
    ModelError,
    SpanScorer,
    StructuralStep,
    Vocabulary,
    encode,
    init_parameters,
    load_checkpoint,
    loss_and_gradients,
    make_dropout_masks,
    save_checkpoint,
    score_labels,
    score_structural,
    zero_gradients,
)
from jointparse.synthetic import generate_treebank
from jointparse.transition import SHIFT_ACTION, apply_action, axiom, replay, parse_actions


@pytest.fixture(scope="module")
def setup():
    trees = generate_treebank("model-tests", 6, max_tokens=10)
    vocab = Vocabulary.from_treebank(trees)
    config = ModelConfig(word_dim=6, hidden_dim=5, scorer_hidden=8)
    params = init_parameters(vocab, config, np.random.default_rng(42))
    return trees, vocab, config, params


class TestVocabulary:
    def test_unk_is_id_zero(self, setup):
        _, vocab, _, _ = setup
        assert vocab.token_id("never-seen-token") == 0
        assert vocab.words[0] == "<unk>"

    def test_chain_ids_dense_from_one(self, setup):
        _, vocab, _, _ = setup
        ids = [vocab.chain_id(c) for c in vocab.chains]
        assert ids == list(range(1, len(vocab.chains) + 1))
        assert vocab.label_dim == len(vocab.chains) + 1

    def test_unknown_chain_rejected(self, setup):
        _, vocab, _, _ = setup
        with pytest.raises(ModelError, match="inventory"):
            vocab.chain_id("NOT+A+CHAIN")


class TestEncode:
    def test_boundary_dimension(self, setup):
        _, _, config, params = setup
        enc = encode(params, [1, 2, 3])
        assert enc.boundary.shape == (4, 4 * config.hidden_dim)

    def test_deterministic_without_dropout(self, setup):
        _, _, _, params = setup
        a = encode(params, [1, 2, 3]).boundary
        b = encode(params, [1, 2, 3]).boundary
        assert np.array_equal(a, b)

    def test_reversal_is_not_feature_reversal(self, setup):
        _, _, _, params = setup
        fwd = encode(params, [1, 2, 3]).boundary
        rev = encode(params, [3, 2, 1]).boundary
        assert not np.allclose(rev, fwd[::-1])

    def test_every_boundary_sees_every_token(self, setup):
        _, _, _, params = setup
        base = encode(params, [1, 2, 3, 4]).boundary
        bump = encode(params, [1, 2, 5, 4]).boundary
        deltas = np.linalg.norm(base - bump, axis=1)
        assert np.all(deltas > 0)

    def test_empty_document_rejected(self, setup):
        _, _, _, params = setup
        with pytest.raises(ModelError):
            encode(params, [])

    def test_sentinel_feature_is_zero(self, setup):
        _, _, _, params = setup
        enc = encode(params, [1, 2])
        assert np.array_equal(enc.feature(-1), np.zeros(enc.boundary.shape[1]))


class TestScoring:
    def test_axiom_masks_combine(self, setup):
        _, _, _, params = setup
        enc = encode(params, [1, 2, 3])
        logp = score_structural(params, enc, axiom(3))
        assert logp[0] == pytest.approx(0.0)  # probability one for shift
        assert logp[1] == -np.inf

    def test_structural_normalization(self, setup):
        _, _, _, params = setup
        enc = encode(params, [1, 2, 3])
        state = replay(3, parse_actions("SH NL SH NL"))
        logp = score_structural(params, enc, state)
        assert np.all(np.isfinite(logp))
        assert np.exp(logp).sum() == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 < p < 1.0 for p in np.exp(logp))

    def test_label_normalization_and_root_mask(self, setup):
        _, vocab, _, params = setup
        enc = encode(params, [1, 2])
        inner = apply_action(axiom(2), SHIFT_ACTION)
        logp = score_labels(params, enc, inner)
        assert np.exp(logp).sum() == pytest.approx(1.0, abs=1e-9)
        root = replay(2, parse_actions("SH NL SH NL CB"))
        logp_root = score_labels(params, enc, root)
        assert logp_root[0] == -np.inf  # no-label carries no mass at the root
        assert np.exp(logp_root[1:]).sum() == pytest.approx(1.0, abs=1e-9)

    def test_width_one_span_uses_degenerate_midpoint(self, setup):
        _, _, _, params = setup
        enc = encode(params, [1, 2])
        state = apply_action(axiom(2), SHIFT_ACTION)
        assert state.midpoint == state.top[0]
        logp = score_labels(params, enc, state)
        assert np.all(np.isfinite(logp))


class TestLoss:
    def test_zero_steps(self, setup):
        _, _, _, params = setup
        loss, grads = loss_and_gradients(params, [1, 2], [])
        assert loss == 0.0
        assert all(not array.any() for array in grads.values())

    def test_duplicated_step_doubles_contribution(self, setup):
        _, _, _, params = setup
        step = StructuralStep(
            below=-1, left=0, right=1, can_shift=True, can_combine=False, target=0
        )
        label = LabelStep(left=0, mid=0, right=1, mask_nolabel=False, target=1)
        one, _ = loss_and_gradients(params, [1, 2], [step, label])
        two, _ = loss_and_gradients(params, [1, 2], [step, label, label])
        single, _ = loss_and_gradients(params, [1, 2], [step])
        assert two - one == pytest.approx(one - single)

    def test_dropout_masks_change_loss_but_not_shape(self, setup):
        _, _, config, params = setup
        rng = np.random.default_rng(0)
        masks = make_dropout_masks(2, config, 0.5, rng)
        label = LabelStep(left=0, mid=0, right=1, mask_nolabel=False, target=1)
        loss_plain, grads_plain = loss_and_gradients(params, [1, 2], [label])
        loss_drop, grads_drop = loss_and_gradients(params, [1, 2], [label], masks)
        assert set(grads_plain) == set(grads_drop)
        assert loss_plain != pytest.approx(loss_drop)

    def test_nonfinite_loss_reported_with_step(self, setup):
        _, _, _, params = setup
        broken = {k: v.copy() for k, v in params.items()}
        broken["label.b2"] = broken["label.b2"] + np.nan
        label = LabelStep(left=0, mid=0, right=1, mask_nolabel=False, target=1)
        with pytest.raises(ModelError, match="step 0"):
            loss_and_gradients(broken, [1, 2], [label])


class TestCheckpoint:
    def test_round_trip(self, setup, tmp_path):
        _, vocab, config, params = setup
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, params, vocab, config)
        loaded_params, loaded_vocab, loaded_config = load_checkpoint(path)
        assert loaded_config == config
        assert loaded_vocab.words == vocab.words
        assert loaded_vocab.chains == vocab.chains
        for key, array in params.items():
            assert np.array_equal(loaded_params[key], array)

    def test_shape_mismatch_rejected(self, setup, tmp_path):
        _, vocab, config, params = setup
        path = tmp_path / "model.ckpt"
        bad = {k: v.copy() for k, v in params.items()}
        bad["label.b2"] = np.zeros(bad["label.b2"].shape[0] + 1)
        save_checkpoint(path, bad, vocab, config)
        with pytest.raises(ModelError, match="shape"):
            load_checkpoint(path)

    def test_non_checkpoint_rejected(self, tmp_path):
        path = tmp_path / "junk.npz"
        np.savez(path, a=np.zeros(3))
        with pytest.raises(ModelError, match="checkpoint"):
            load_checkpoint(path)


def test_span_scorer_interface(setup):
    _, vocab, _, params = setup
    scorer = SpanScorer(params, vocab)
    scorer.prepare(["w1", "w2", "w3"])
    pair = scorer.structural(-1, 0, 1)
    assert pair.shape == (2,)
    labels = scorer.labels(0, 1, 2)
    assert labels.shape == (vocab.label_dim,)
    assert scorer.inventory()[0] is None


def test_zero_gradients_match_shapes(setup):
    _, _, _, params = setup
    grads = zero_gradients(params)
    assert set(grads) == set(params)
    assert all(grads[k].shape == params[k].shape for k in params)
