"""Seeded training loop, evaluation, and the synthetic demo dataset.

Batches are mean-reduced one item at a time (the layers operate on a
single sequence), which is arithmetically identical to batched cross
entropy. Shuffling uses one seeded permutation per epoch, so a run is
reproducible from (dataset order, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.errors import ItsgwError, NonFiniteValue
from ..core.records import SensorRecord, record_schema
from ..nn.ops import cross_entropy
from ..text.serialize import serialize_record
from ..text.tokenizer import Vocab, build_vocab, encode
from .adamw import AdamW
from .model import EncoderModel

SPEED_SCHEMA = record_schema(("speed_kph", "numeric"))
SPEED_CLASS_NAMES = ("nominal", "speeding")


class EmptyDataset(ItsgwError):
    pass


@dataclass
class TrainLog:
    step_losses: list[float] = field(default_factory=list)
    epoch_accuracies: list[float] = field(default_factory=list)

    def epoch_mean_loss(self, epoch: int, steps_per_epoch: int) -> float:
        chunk = self.step_losses[epoch * steps_per_epoch : (epoch + 1) * steps_per_epoch]
        return float(np.mean(chunk))


def evaluate_accuracy(model: EncoderModel, dataset: list[tuple]) -> float:
    """Fraction of argmax predictions matching labels; argmax ties break
    toward the lowest class index."""
    if not dataset:
        raise EmptyDataset("nothing to evaluate")
    correct = 0
    for inputs, label in dataset:
        logits = model.forward(_as_pair(inputs))
        if int(np.argmax(logits[0])) == label:
            correct += 1
    return correct / len(dataset)


def _as_pair(inputs) -> tuple:
    if isinstance(inputs, tuple):
        return inputs
    return (inputs.ids, inputs.mask)  # EncodedText


def train(
    model: EncoderModel,
    dataset: list[tuple],
    epochs: int = 3,
    batch_size: int = 16,
    optimizer: AdamW | None = None,
    seed: int = 0,
    max_steps: int | None = None,
    eval_dataset: list[tuple] | None = None,
) -> TrainLog:
    if not dataset:
        raise EmptyDataset("nothing to train on")
    optimizer = optimizer or AdamW(model.params())
    rng = np.random.default_rng(seed)
    log = TrainLog()
    steps = 0
    for _ in range(epochs):
        perm = rng.permutation(len(dataset))
        for lo in range(0, len(perm), batch_size):
            batch = [dataset[i] for i in perm[lo : lo + batch_size]]
            acc = {name: np.zeros_like(p) for name, p in model.params().items()}
            loss_sum = 0.0
            for inputs, label in batch:
                logits = model.forward(_as_pair(inputs))
                loss, dlogits = cross_entropy(logits, np.array([label]))
                loss_sum += loss
                model.backward(dlogits)
                for name, g in model.grads().items():
                    acc[name] += g
            scale = 1.0 / len(batch)
            for name in acc:
                acc[name] *= scale
            optimizer.step(acc)
            mean_loss = loss_sum / len(batch)
            if not np.isfinite(mean_loss) or not model.all_finite():
                raise NonFiniteValue(f"training diverged at step {steps}")
            log.step_losses.append(mean_loss)
            steps += 1
            if max_steps is not None and steps >= max_steps:
                log.epoch_accuracies.append(
                    evaluate_accuracy(model, eval_dataset or dataset)
                )
                return log
        log.epoch_accuracies.append(evaluate_accuracy(model, eval_dataset or dataset))
    return log


# ------------------------------------------------------------ demo data


def synthetic_speed_records(n: int = 1000, seed: int = 0) -> list[SensorRecord]:
    """Separable 2-class set: speed on a 0.5 km/h grid, class 1 iff > 60.

    The grid keeps the numeric vocabulary small enough that every speed
    token repeats, so the classifier can learn token-class associations.
    """
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(n):
        speed = float(rng.integers(0, 241)) / 2.0
        records.append(SensorRecord(values=(speed,), label=int(speed > 60.0)))
    return records


def prepare_text_dataset(
    schema,
    records: list[SensorRecord],
    vocab: Vocab | None = None,
    max_len: int = 16,
) -> tuple[list[tuple], Vocab]:
    """Serialize, fit a vocab when none is given, and encode."""
    texts = [serialize_record(schema, r) for r in records]
    if vocab is None:
        vocab = build_vocab(texts, min_frequency=1)
    dataset = [
        (encode(text, vocab, max_len), r.label) for text, r in zip(texts, records)
    ]
    return dataset, vocab
