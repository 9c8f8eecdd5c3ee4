"""Encoder, optimizer, MAC counter, and checkpoint tests.

Oracles live here: a pure-loop forward pass (no numpy) for the model, a
math-module scalar AdamW trajectory, and an independent parameter-count
formula.
"""

import math

import numpy as np
import pytest

from itsgw.core.errors import ItsgwError, ShapeMismatch
from itsgw.encoder import (
    AdamW,
    EmptyDataset,
    EncoderConfig,
    EncoderModel,
    InvalidConfig,
    MalformedCheckpoint,
    adamw_update,
    count_macs,
    evaluate_accuracy,
    forward_classify,
    init_model,
    load_checkpoint,
    prepare_text_dataset,
    save_checkpoint,
    synthetic_speed_records,
    train,
)
from itsgw.encoder.train import SPEED_SCHEMA
from itsgw.nn.gradcheck import grad_check
from itsgw.nn.ops import cross_entropy
from itsgw.text import build_vocab, encode

TOKEN_TINY = dict(
    n_layers=1, n_heads=2, d_model=8, d_ff=16, max_len=6, n_classes=3, vocab_size=12
)


def closed_form_count(config):
    """Independent parameter-count formula."""
    d, ff = config.d_model, config.d_ff
    per_layer = 4 * d * d + 2 * d * ff + ff + 5 * d
    width = config.vocab_size if config.vocab_size is not None else config.feature_dim
    return (
        width * d
        + config.max_len * d
        + config.n_layers * per_layer
        + d * config.n_classes
        + config.n_classes
    )


def randomize_model(model, rng, std=0.5):
    # O(1)-scale parameters keep gradients far above the fd noise floor
    for p in model.params().values():
        p[...] = rng.normal(0.0, std, size=p.shape)


def ce_loss(label):
    def fn(out):
        return cross_entropy(out, np.array([label]))

    return fn


def loop_forward_oracle(model, ids, mask):
    """Re-implements forward with plain Python loops and math only."""
    cfg = model.config
    d, n_heads = cfg.d_model, cfg.n_heads
    d_k = d // n_heads
    emb = model.embedding.tolist()
    pos = model.pos_emb.tolist()
    x = [[emb[ids[i]][j] + pos[i][j] for j in range(d)] for i in range(len(ids))]

    def ln(rows, gamma, beta):
        out = []
        for row in rows:
            mean = sum(row) / len(row)
            var = sum((v - mean) ** 2 for v in row) / len(row)
            inv = 1.0 / math.sqrt(var + 1e-5)
            out.append([(v - mean) * inv * g + b for v, g, b in zip(row, gamma, beta)])
        return out

    def matmul(rows, w):
        return [
            [sum(row[t] * w[t][c] for t in range(len(row))) for c in range(len(w[0]))]
            for row in rows
        ]

    for block in model.blocks:
        y = ln(x, block.ln1.gamma.tolist(), block.ln1.beta.tolist())
        q = matmul(y, block.attn.wq.tolist())
        k = matmul(y, block.attn.wk.tolist())
        v = matmul(y, block.attn.wv.tolist())
        concat = [[0.0] * d for _ in range(len(x))]
        for h in range(n_heads):
            lo = h * d_k
            for i in range(len(x)):
                scores = []
                for j in range(len(x)):
                    if not mask[j]:
                        scores.append(None)
                        continue
                    s = sum(q[i][lo + t] * k[j][lo + t] for t in range(d_k))
                    scores.append(s / math.sqrt(d_k))
                finite = [s for s in scores if s is not None]
                top = max(finite)
                weights = [
                    0.0 if s is None else math.exp(s - top) for s in scores
                ]
                total = sum(weights)
                for t in range(d_k):
                    concat[i][lo + t] = sum(
                        (weights[j] / total) * v[j][lo + t] for j in range(len(x))
                    )
        attn_out = matmul(concat, block.attn.wo.tolist())
        r1 = [[x[i][j] + attn_out[i][j] for j in range(d)] for i in range(len(x))]
        y2 = ln(r1, block.ln2.gamma.tolist(), block.ln2.beta.tolist())
        h1 = matmul(y2, block.ffn.lin1.w.tolist())
        b1 = block.ffn.lin1.b.tolist()
        acts = [
            [
                0.5
                * (val + b1[c])
                * (
                    1.0
                    + math.tanh(
                        0.7978845608
                        * ((val + b1[c]) + 0.044715 * (val + b1[c]) ** 3)
                    )
                )
                for c, val in enumerate(row)
            ]
            for row in h1
        ]
        h2 = matmul(acts, block.ffn.lin2.w.tolist())
        b2 = block.ffn.lin2.b.tolist()
        x = [
            [r1[i][j] + h2[i][j] + b2[j] for j in range(d)] for i in range(len(x))
        ]
    normed = ln(x, [1.0] * d, [0.0] * d)
    head_w = model.head.w.tolist()
    head_b = model.head.b.tolist()
    return [
        sum(normed[0][j] * head_w[j][c] for j in range(d)) + head_b[c]
        for c in range(model.config.n_classes)
    ]


# ---------------------------------------------------------------- config


def test_config_rejects_bad_shapes():
    with pytest.raises(InvalidConfig):
        EncoderConfig(n_layers=1, n_heads=4, d_model=10, d_ff=16, max_len=8,
                      n_classes=3, vocab_size=10)
    with pytest.raises(InvalidConfig):
        EncoderConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16, max_len=3,
                      n_classes=3, vocab_size=10)
    with pytest.raises(InvalidConfig):
        EncoderConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16, max_len=8,
                      n_classes=1, vocab_size=10)
    with pytest.raises(InvalidConfig):
        EncoderConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16, max_len=8,
                      n_classes=3, vocab_size=10, feature_dim=257)
    with pytest.raises(InvalidConfig):
        EncoderConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16, max_len=8,
                      n_classes=3)


# ---------------------------------------------------------------- init


def test_param_count_head_only_fixture():
    config = EncoderConfig(n_layers=0, n_heads=1, d_model=8, d_ff=16, max_len=4,
                           n_classes=3, vocab_size=10)
    model = init_model(config)
    assert model.param_count() == 139 == closed_form_count(config)


def test_param_count_closed_form_random_configs():
    rng = np.random.default_rng(7)
    for _ in range(20):
        heads = int(rng.integers(1, 4))
        token_mode = rng.random() < 0.5
        config = EncoderConfig(
            n_layers=int(rng.integers(0, 4)),
            n_heads=heads,
            d_model=heads * int(rng.integers(1, 6)),
            d_ff=int(rng.integers(1, 40)),
            max_len=int(rng.integers(4, 20)),
            n_classes=int(rng.integers(2, 6)),
            vocab_size=int(rng.integers(2, 50)) if token_mode else None,
            feature_dim=None if token_mode else 257,
        )
        assert init_model(config).param_count() == closed_form_count(config)


def test_init_deterministic_per_seed():
    config = EncoderConfig(**TOKEN_TINY, seed=5)
    a, b = init_model(config), init_model(config)
    for (ka, pa), (kb, pb) in zip(a.params().items(), b.params().items()):
        assert ka == kb
        assert np.array_equal(pa, pb)
    other = init_model(EncoderConfig(**TOKEN_TINY, seed=6))
    assert not np.array_equal(a.embedding, other.embedding)


def test_init_weight_statistics():
    config = EncoderConfig(n_layers=2, n_heads=4, d_model=64, d_ff=128,
                           max_len=32, n_classes=3, vocab_size=500, seed=1)
    model = init_model(config)
    assert abs(model.embedding.std() - 0.02) < 0.002
    block = model.blocks[0]
    assert np.all(block.ln1.gamma == 1.0)
    assert np.all(block.ln1.beta == 0.0)
    assert np.all(model.head.b == 0.0)
    assert np.all(model.final_norm.gamma == 1.0)


# ---------------------------------------------------------------- forward


def test_forward_matches_loop_oracle():
    rng = np.random.default_rng(11)
    model = init_model(EncoderConfig(**TOKEN_TINY, seed=3))
    randomize_model(model, rng, std=0.4)
    ids = [2, 7, 5, 4, 3, 0]
    mask = [1, 1, 1, 1, 1, 0]
    got = model.forward((ids, mask))[0]
    want = loop_forward_oracle(model, ids, mask)
    assert np.max(np.abs(got - np.array(want))) <= 1e-10


def test_forward_feature_mode_matches_loop_oracle_on_projection():
    # feature mode only swaps the embedding lookup for a projection;
    # check that projection against direct loops on an L=0 model
    config = EncoderConfig(n_layers=0, n_heads=1, d_model=4, d_ff=8, max_len=5,
                           n_classes=2, feature_dim=6, seed=9)
    model = init_model(config)
    rng = np.random.default_rng(13)
    randomize_model(model, rng, std=0.4)
    features = rng.standard_normal((3, 6))
    logits = model.forward((features, np.ones(3, dtype=bool)))[0]
    x = [
        [
            sum(features[i][t] * model.embedding[t][j] for t in range(6))
            + model.pos_emb[i][j]
            for j in range(4)
        ]
        for i in range(3)
    ]
    row = x[0]
    mean = sum(row) / 4
    var = sum((v - mean) ** 2 for v in row) / 4
    normed = [(v - mean) / math.sqrt(var + 1e-5) for v in row]
    want = [
        sum(normed[j] * model.head.w[j][c] for j in range(4)) + model.head.b[c]
        for c in range(2)
    ]
    assert np.max(np.abs(logits - np.array(want))) <= 1e-10


def test_forward_classify_returns_class_vector():
    vocab = build_vocab(["speed is 42"], min_frequency=1)
    config = EncoderConfig(n_layers=1, n_heads=2, d_model=8, d_ff=16, max_len=8,
                           n_classes=3, vocab_size=len(vocab), seed=0)
    model = init_model(config)
    logits = forward_classify(model, encode("speed is 42", vocab, max_len=8))
    assert logits.shape == (3,)


def test_forward_invariant_to_padded_positions():
    model = init_model(EncoderConfig(**TOKEN_TINY, seed=21))
    base = model.forward(([2, 7, 5, 3, 0, 0], [1, 1, 1, 1, 0, 0]))
    fiddled = model.forward(([2, 7, 5, 3, 9, 11], [1, 1, 1, 1, 0, 0]))
    assert np.array_equal(base, fiddled)


def test_forward_shape_errors():
    model = init_model(EncoderConfig(**TOKEN_TINY, seed=0))
    with pytest.raises(ShapeMismatch):
        model.forward(([2, 3], [1, 1]))  # wrong length
    with pytest.raises(ShapeMismatch):
        model.forward(([2, 3, 0, 0, 0, 99], [1, 1, 1, 1, 1, 1]))  # id too big
    feat_model = init_model(
        EncoderConfig(n_layers=0, n_heads=1, d_model=4, d_ff=8, max_len=4,
                      n_classes=2, feature_dim=6)
    )
    with pytest.raises(ShapeMismatch):
        feat_model.forward((np.zeros((5, 6)), np.ones(5, dtype=bool)))  # T > max_len


def test_end_to_end_gradients():
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        model = init_model(EncoderConfig(**TOKEN_TINY, seed=seed))
        randomize_model(model, rng, std=0.5)
        err = grad_check(model, ([2, 7, 5, 3, 0, 0], [1, 1, 1, 1, 0, 0]),
                         h=1e-5, loss_fn=ce_loss(1))
        assert err < 1e-4


# ---------------------------------------------------------------- adamw


def reference_adamw_trajectory(theta, grads, lr=1e-3, b1=0.9, b2=0.999,
                               eps=1e-8, wd=0.01):
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        theta = theta - lr * (mhat / (math.sqrt(vhat) + eps) + wd * theta)
        out.append(theta)
    return out


def test_adamw_first_step_closed_forms():
    theta, m, v, t = adamw_update(0.0, 1.0, 0.0, 0.0, 0)
    assert t == 1
    assert abs(theta - (-1e-3 / (1 + 1e-8))) < 1e-18
    assert np.isclose(theta, -9.99999990e-4, atol=1e-12)
    theta, _, _, _ = adamw_update(1.0, 0.0, 0.0, 0.0, 0)
    assert abs(theta - 0.99999) < 1e-15


def test_adamw_hundred_step_scalar_oracle():
    rng = np.random.default_rng(17)
    grads = [float(g) for g in rng.standard_normal(100)]
    want = reference_adamw_trajectory(0.3, grads)
    theta, m, v, t = 0.3, 0.0, 0.0, 0
    got = []
    for g in grads:
        theta, m, v, t = adamw_update(theta, g, m, v, t)
        got.append(theta)
    assert max(abs(a - b) for a, b in zip(got, want)) < 1e-12
    assert t == 100


def test_adamw_class_matches_pure_function():
    rng = np.random.default_rng(19)
    params = {"w": rng.standard_normal((3, 2)), "b": rng.standard_normal(2)}
    mirror = {k: p.copy() for k, p in params.items()}
    state = {k: (np.zeros_like(p), np.zeros_like(p)) for k, p in params.items()}
    opt = AdamW(params)
    t = 0
    for _ in range(25):
        grads = {k: rng.standard_normal(p.shape) for k, p in params.items()}
        opt.step(grads)
        t += 1
        for k in mirror:
            m, v = state[k]
            mirror[k], m, v, _ = adamw_update(mirror[k], grads[k], m, v, t - 1)
            state[k] = (m, v)
    for k in params:
        assert np.max(np.abs(params[k] - mirror[k])) < 1e-12


def test_adamw_decay_zero_equals_adam():
    rng = np.random.default_rng(23)
    grads = [float(g) for g in rng.standard_normal(50)]
    theta_w, m, v, t = 0.7, 0.0, 0.0, 0
    theta_a, ma, va = 0.7, 0.0, 0.0
    for i, g in enumerate(grads, start=1):
        theta_w, m, v, t = adamw_update(theta_w, g, m, v, t, weight_decay=0.0)
        ma = 0.9 * ma + 0.1 * g
        va = 0.999 * va + 0.001 * g * g
        theta_a -= 1e-3 * (ma / (1 - 0.9**i)) / (math.sqrt(va / (1 - 0.999**i)) + 1e-8)
        assert abs(theta_w - theta_a) < 1e-15


def test_adamw_rejects_misshaped_grads():
    opt = AdamW({"w": np.zeros((2, 2))})
    with pytest.raises(ShapeMismatch):
        opt.step({"w": np.zeros(3)})
    with pytest.raises(ShapeMismatch):
        opt.step({})


# ---------------------------------------------------------------- macs


def test_count_macs_fixture():
    config = EncoderConfig(n_layers=2, n_heads=1, d_model=64, d_ff=256,
                           max_len=128, n_classes=3, vocab_size=100)
    assert count_macs(config, 128) == 16_777_408


def test_count_macs_head_only():
    config = EncoderConfig(n_layers=0, n_heads=1, d_model=64, d_ff=256,
                           max_len=128, n_classes=3, vocab_size=100)
    assert count_macs(config, 128) == 64 * 3


def test_count_macs_monotone():
    rng = np.random.default_rng(27)
    for _ in range(100):
        base = dict(
            n_layers=int(rng.integers(1, 4)),
            n_heads=1,
            d_model=int(rng.integers(2, 40)),
            d_ff=int(rng.integers(2, 80)),
            max_len=512,
            n_classes=int(rng.integers(2, 5)),
            vocab_size=50,
        )
        s = int(rng.integers(1, 256))
        here = count_macs(EncoderConfig(**base), s)
        assert count_macs(EncoderConfig(**base), s + 1) >= here
        for key in ("n_layers", "d_model", "d_ff"):
            grown = dict(base)
            grown[key] += 1
            assert count_macs(EncoderConfig(**grown), s) >= here


def test_count_macs_rejects_overlong_sequence():
    config = EncoderConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16,
                           max_len=16, n_classes=2, vocab_size=10)
    with pytest.raises(ItsgwError):
        count_macs(config, 17)


# ---------------------------------------------------------------- training


def small_speed_setup(n=120, seed=0):
    records = synthetic_speed_records(n, seed=seed)
    dataset, vocab = prepare_text_dataset(SPEED_SCHEMA, records, max_len=10)
    config = EncoderConfig(n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=10,
                           n_classes=2, vocab_size=len(vocab), seed=seed)
    return init_model(config), dataset


def test_training_is_deterministic():
    model_a, dataset = small_speed_setup()
    model_b, _ = small_speed_setup()
    log_a = train(model_a, dataset, epochs=1, batch_size=16, seed=4)
    log_b = train(model_b, dataset, epochs=1, batch_size=16, seed=4)
    assert log_a.step_losses == log_b.step_losses


def test_training_loss_decreases_across_epochs():
    model, dataset = small_speed_setup(n=200)
    opt = AdamW(model.params(), lr=3e-3)
    log = train(model, dataset, epochs=4, batch_size=16, optimizer=opt, seed=1)
    steps_per_epoch = math.ceil(len(dataset) / 16)
    assert log.epoch_mean_loss(3, steps_per_epoch) < log.epoch_mean_loss(0, steps_per_epoch)
    assert model.all_finite()
    assert len(log.epoch_accuracies) == 4


def test_training_rejects_empty_dataset():
    model, _ = small_speed_setup()
    with pytest.raises(EmptyDataset):
        train(model, [], epochs=1, batch_size=4)
    with pytest.raises(EmptyDataset):
        evaluate_accuracy(model, [])


def test_evaluate_accuracy_matches_counting_oracle():
    model, dataset = small_speed_setup(n=60, seed=2)
    got = evaluate_accuracy(model, dataset)
    correct = 0
    for encoded, label in dataset:
        logits = model.forward((encoded.ids, encoded.mask))[0]
        best = 0
        for c in range(1, len(logits)):
            if logits[c] > logits[best]:
                best = c
        correct += int(best == label)
    assert got == correct / len(dataset)


def test_evaluate_accuracy_fixture_fractions():
    class TwoClassStub:
        def __init__(self, right_on_even):
            self.right_on_even = right_on_even

        def forward(self, pair):
            want = pair[0][0]
            if self.right_on_even and want % 2 == 0:
                return np.array([[1.0, 0.0]]) if want == 0 else np.array([[0.0, 1.0]])
            return np.array([[0.0, 1.0]]) if want == 0 else np.array([[1.0, 0.0]])

    dataset = [(((i % 2,), (1,)), i % 2) for i in range(10)]
    assert evaluate_accuracy(TwoClassStub(False), dataset) == 0.0
    assert evaluate_accuracy(TwoClassStub(True), dataset) == 0.5


# ---------------------------------------------------------------- checkpoints


def test_checkpoint_round_trip_token_mode(tmp_path):
    model, _ = small_speed_setup(n=30)
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == model.config
    for (ka, pa), (kb, pb) in zip(model.params().items(), loaded.params().items()):
        assert ka == kb
        assert np.array_equal(pa, pb)
    second = tmp_path / "again.ckpt"
    save_checkpoint(loaded, second)
    assert path.read_bytes() == second.read_bytes()


def test_checkpoint_round_trip_feature_mode(tmp_path):
    config = EncoderConfig(n_layers=2, n_heads=2, d_model=8, d_ff=16, max_len=12,
                           n_classes=3, feature_dim=257, seed=4)
    model = init_model(config)
    path = tmp_path / "audio.ckpt"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config.mode == "feature_input"
    assert np.array_equal(loaded.embedding, model.embedding)


def test_checkpoint_rejects_malformed_files(tmp_path):
    model, _ = small_speed_setup(n=30)
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    raw = path.read_bytes()
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOTCK" + raw[5:])
    with pytest.raises(MalformedCheckpoint):
        load_checkpoint(bad)
    bad.write_bytes(raw[:-16])
    with pytest.raises(MalformedCheckpoint):
        load_checkpoint(bad)
    bad.write_bytes(raw.replace(b"n_heads=", b"bogus_k="))
    with pytest.raises(MalformedCheckpoint):
        load_checkpoint(bad)
