"""Tests for late fusion and the accuracy-feedback loop."""

from __future__ import annotations

import math
import random
import threading

import pytest

from itsgw.core.errors import SchemaMismatch, ValidationFailed
from itsgw.core.records import Modality
from itsgw.fusion import (
    AllZeroWeights,
    FeedbackState,
    ModalityPosterior,
    RetrainEvent,
    feedback_update,
    fuse_late,
    weights_from_accuracy,
)


def loop_fused_oracle(posteriors):
    """Weighted average computed with plain Python loops, no numpy."""
    n = len(posteriors[0].distribution)
    total_w = sum(p.weight for p in posteriors)
    fused = [0.0] * n
    for p in posteriors:
        for i in range(n):
            fused[i] += p.weight * p.distribution[i]
    fused = [v / total_w for v in fused]
    best = 0
    for i in range(1, n):
        if fused[i] > fused[best]:
            best = i
    return fused, best


def posterior(modality, dist, weight=1.0):
    return ModalityPosterior(modality=modality, distribution=tuple(dist), weight=weight)


def random_distribution(rng, n):
    raw = [rng.random() + 1e-6 for _ in range(n)]
    total = sum(raw)
    return [v / total for v in raw]


# --- fuse_late fixtures ---


def test_single_nonzero_weight_projects_that_posterior():
    a = posterior(Modality.TIME_SERIES, [0.2, 0.3, 0.5], weight=1.0)
    b = posterior(Modality.AUDIO, [0.9, 0.05, 0.05], weight=0.0)
    result = fuse_late([a, b])
    assert result.distribution == pytest.approx(a.distribution, abs=1e-15)
    assert result.predicted_class == 2


def test_equal_weights_tie_resolves_to_lowest_class():
    a = posterior(Modality.TIME_SERIES, [0.6, 0.4])
    b = posterior(Modality.AUDIO, [0.4, 0.6])
    result = fuse_late([a, b])
    assert result.distribution == pytest.approx([0.5, 0.5], abs=1e-15)
    assert result.predicted_class == 0


def test_uniform_weight_scaling_leaves_result_unchanged():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(2, 6)
        posteriors = [
            posterior(Modality.TIME_SERIES, random_distribution(rng, n), rng.uniform(0.1, 3.0)),
            posterior(Modality.AUDIO, random_distribution(rng, n), rng.uniform(0.1, 3.0)),
            posterior(Modality.VIDEO, random_distribution(rng, n), rng.uniform(0.1, 3.0)),
        ]
        c = rng.uniform(0.01, 100.0)
        scaled = [
            ModalityPosterior(p.modality, p.distribution, p.weight * c) for p in posteriors
        ]
        base = fuse_late(posteriors)
        rescaled = fuse_late(scaled)
        assert rescaled.predicted_class == base.predicted_class
        assert rescaled.distribution == pytest.approx(base.distribution, abs=1e-12)


def test_fused_matches_loop_oracle_random_trials():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(2, 8)
        k = rng.randint(1, 3)
        modalities = [Modality.TIME_SERIES, Modality.AUDIO, Modality.VIDEO]
        posteriors = [
            posterior(modalities[i], random_distribution(rng, n), rng.uniform(0.0, 2.0))
            for i in range(k)
        ]
        if sum(p.weight for p in posteriors) == 0.0:
            continue
        expected_dist, expected_class = loop_fused_oracle(posteriors)
        result = fuse_late(posteriors)
        assert result.distribution == pytest.approx(expected_dist, abs=1e-12)
        assert result.predicted_class == expected_class


def test_fused_is_convex_combination_and_sums_to_one():
    rng = random.Random(23)
    for _ in range(100):
        n = rng.randint(2, 5)
        posteriors = [
            posterior(m, random_distribution(rng, n), rng.uniform(0.05, 2.0))
            for m in (Modality.TIME_SERIES, Modality.AUDIO, Modality.VIDEO)
        ]
        result = fuse_late(posteriors)
        assert math.isclose(sum(result.distribution), 1.0, abs_tol=1e-9)
        for i in range(n):
            lo = min(p.distribution[i] for p in posteriors)
            hi = max(p.distribution[i] for p in posteriors)
            assert lo - 1e-12 <= result.distribution[i] <= hi + 1e-12


def test_mismatched_class_counts_raise_schema_mismatch():
    a = posterior(Modality.TIME_SERIES, [0.5, 0.5])
    b = posterior(Modality.AUDIO, [0.3, 0.3, 0.4])
    with pytest.raises(SchemaMismatch):
        fuse_late([a, b])


def test_all_zero_weights_raise():
    a = posterior(Modality.TIME_SERIES, [0.5, 0.5], weight=0.0)
    b = posterior(Modality.AUDIO, [0.4, 0.6], weight=0.0)
    with pytest.raises(AllZeroWeights):
        fuse_late([a, b])
    with pytest.raises(AllZeroWeights):
        fuse_late([])


def test_posterior_validation_rejects_bad_inputs():
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [0.5, 0.6])  # sums to 1.1
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [1.5, -0.5])  # negative entry
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [])
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [0.5, 0.5], weight=-1.0)
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [float("nan"), 1.0])


def test_distribution_sum_tolerance_is_tight():
    # 1e-10 off is inside the 1e-9 budget; 1e-8 off is outside.
    posterior(Modality.AUDIO, [0.5, 0.5 + 1e-10])
    with pytest.raises(ValidationFailed):
        posterior(Modality.AUDIO, [0.5, 0.5 + 1e-8])


def test_weights_from_accuracy_renormalizes():
    weights = weights_from_accuracy(
        {Modality.TIME_SERIES: 0.9448, Modality.AUDIO: 0.9280, Modality.VIDEO: 0.8873}
    )
    assert math.isclose(sum(weights.values()), 1.0, abs_tol=1e-12)
    assert weights[Modality.TIME_SERIES] > weights[Modality.AUDIO] > weights[Modality.VIDEO]
    uniform = weights_from_accuracy({Modality.TIME_SERIES: 0.0, Modality.AUDIO: 0.0})
    assert uniform == {Modality.TIME_SERIES: 0.5, Modality.AUDIO: 0.5}
    assert weights_from_accuracy({}) == {}
    with pytest.raises(ValidationFailed):
        weights_from_accuracy({Modality.AUDIO: 1.5})


# --- feedback_update fixtures ---


def test_hundred_incorrect_bits_emit_event_with_zero_accuracy():
    state = FeedbackState(Modality.AUDIO)
    event = None
    for _ in range(100):
        event = feedback_update(state, correct=False)
    assert isinstance(event, RetrainEvent)
    assert event.window_accuracy == 0.0
    assert event.modalities == frozenset({Modality.AUDIO})


def test_warm_up_window_emits_nothing():
    state = FeedbackState(Modality.VIDEO)
    events = [feedback_update(state, correct=False) for _ in range(99)]
    assert events == [None] * 99
    assert not state.is_warmed_up
    assert state.window_accuracy() is None


def test_window_mean_exactly_at_threshold_emits_nothing():
    # 85 correct then 15 incorrect: mean is exactly 0.85 -> strict < does not fire.
    state = FeedbackState(Modality.TIME_SERIES)
    event = None
    for i in range(100):
        event = feedback_update(state, correct=(i < 85))
    assert state.window_accuracy() == pytest.approx(0.85, abs=0)
    assert event is None
    # One more miss drops the mean to 0.84 and fires.
    event = feedback_update(state, correct=False)
    assert isinstance(event, RetrainEvent)
    assert event.window_accuracy == pytest.approx(0.84, abs=1e-12)


def test_window_evicts_oldest_bit():
    state = FeedbackState(Modality.AUDIO, window=4, threshold=0.6)
    for bit in (False, True, True, True):
        feedback_update(state, correct=bit)
    assert state.window_accuracy() == pytest.approx(0.75)
    feedback_update(state, correct=True)  # evicts the initial False
    assert state.window_accuracy() == pytest.approx(1.0)
    assert len(state) == 4


def test_event_accuracy_matches_running_oracle():
    rng = random.Random(3)
    state = FeedbackState(Modality.VIDEO, window=10, threshold=0.7)
    bits: list[int] = []
    for step in range(500):
        bit = rng.random() < 0.65
        bits.append(1 if bit else 0)
        event = feedback_update(state, correct=bit)
        window = bits[-10:]
        if len(bits) < 10:
            assert event is None
        else:
            mean = sum(window) / 10
            if mean < 0.7:
                assert event is not None and event.window_accuracy == pytest.approx(mean)
            else:
                assert event is None


def test_event_rate_is_rare_when_accuracy_clears_threshold():
    # True accuracy = threshold + 0.1; over 10k steps the full-window mean
    # should rarely dip below threshold (spec budget: < 1%).
    rng = random.Random(17)
    state = FeedbackState(Modality.TIME_SERIES)  # window 100, threshold 0.85
    events = 0
    steps = 10_000
    for _ in range(steps):
        if feedback_update(state, correct=(rng.random() < 0.95)) is not None:
            events += 1
    assert events / steps < 0.01


def test_feedback_state_rejects_bad_parameters():
    with pytest.raises(ValidationFailed):
        FeedbackState(Modality.AUDIO, window=0)
    with pytest.raises(ValidationFailed):
        FeedbackState(Modality.AUDIO, threshold=0.0)
    with pytest.raises(ValidationFailed):
        FeedbackState(Modality.AUDIO, threshold=1.0)


def test_concurrent_updates_preserve_bit_count():
    state = FeedbackState(Modality.AUDIO, window=10_000, threshold=0.5)
    n_threads, per_thread = 8, 500

    def push():
        for _ in range(per_thread):
            feedback_update(state, correct=True)

    threads = [threading.Thread(target=push) for _ in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(state) == n_threads * per_thread
