"""Shared fixtures and the acceptance-criteria summary printer."""

from __future__ import annotations

import pytest

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)

from itsgw.encoder import (
    SPEED_SCHEMA,
    AdamW,
    EncoderConfig,
    evaluate_accuracy,
    init_model,
    prepare_text_dataset,
    synthetic_speed_records,
    train,
)


@pytest.fixture(scope="session")
def speed_model():
    """(model, vocab, train_accuracy) for a separable 2-class tabular task."""
    records = synthetic_speed_records(200, seed=0)
    dataset, vocab = prepare_text_dataset(SPEED_SCHEMA, records, max_len=10)
    config = EncoderConfig(
        n_layers=1,
        n_heads=2,
        d_model=16,
        d_ff=32,
        max_len=10,
        n_classes=2,
        vocab_size=len(vocab),
        seed=0,
    )
    model = init_model(config)
    train(
        model,
        dataset,
        epochs=5,
        batch_size=16,
        optimizer=AdamW(model.params(), lr=3e-3),
        seed=1,
    )
    return model, vocab, evaluate_accuracy(model, dataset)
