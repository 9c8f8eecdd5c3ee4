"""Command-line client and operator tools for the gateway."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from ..core.errors import ItsgwError
from ..core.metrics import REPORT_HEADER, MetricsRow, metrics_row_format
from ..core.records import Modality, SensorRecord, record_schema
from ..encoder.checkpoint import load_checkpoint, save_checkpoint
from ..encoder.config import EncoderConfig
from ..encoder.macs import count_macs, macs_to_gop
from ..encoder.model import forward_classify, init_model
from ..encoder.train import (
    SPEED_CLASS_NAMES,
    SPEED_SCHEMA,
    evaluate_accuracy,
    prepare_text_dataset,
    train,
)
from ..text.tokenizer import CLS, UNK, build_vocab, encode, load_vocab, save_vocab
from ..visual.captioner import RefineTask
from ..visual.chain import run_caption_chain
from ..visual.pgm import load_frame_sequence
from .config import load_config
from .runtime import gateway_from_config


def _read_ndjson(path: str) -> list[dict[str, Any]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ItsgwError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
    return rows


def _load_tabular(path: str):
    """NDJSON records; an optional first meta line sets schema and classes."""
    rows = _read_ndjson(path)
    schema = SPEED_SCHEMA
    class_names = SPEED_CLASS_NAMES
    if rows and "_schema" in rows[0]:
        meta = rows.pop(0)
        schema = record_schema(*[(f[0], f[1]) for f in meta["_schema"]])
        class_names = tuple(meta.get("_classes", class_names))
    records = [
        SensorRecord(values=tuple(row["values"]), label=row.get("label")) for row in rows
    ]
    return schema, class_names, records


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    config = load_config(args.config)
    gateway = gateway_from_config(config)
    gateway.start()
    host, port = config.http_host_port
    try:
        uvicorn.run(create_app(gateway), host=host, port=port, log_level="warning")
    finally:
        gateway.stop()
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    modality = Modality(args.modality)
    if modality is not Modality.TIME_SERIES:
        print(f"training is implemented for time_series only, not {modality.value}",
              file=sys.stderr)
        return 2
    schema, class_names, records = _load_tabular(args.data)
    if any(r.label is None for r in records):
        print("every training record needs a label", file=sys.stderr)
        return 2
    dataset, vocab = prepare_text_dataset(schema, records, max_len=args.max_len)
    config = EncoderConfig(
        n_layers=args.layers,
        n_heads=args.heads,
        d_model=args.d_model,
        d_ff=args.d_ff,
        max_len=args.max_len,
        n_classes=len(class_names),
        vocab_size=len(vocab),
        seed=args.seed,
    )
    model = init_model(config)
    log = train(
        model,
        dataset,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        max_steps=args.max_steps,
        eval_dataset=dataset,
    )
    save_checkpoint(model, args.out)
    save_vocab(vocab, args.out + ".vocab")
    for epoch, accuracy in enumerate(log.epoch_accuracies):
        print(f"epoch={epoch} accuracy={accuracy:.4f}")
    print(f"checkpoint={args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    model = load_checkpoint(args.ckpt)
    if model.config.vocab_size is None:
        print("eval supports token-mode checkpoints", file=sys.stderr)
        return 2
    vocab = load_vocab(args.ckpt + ".vocab")
    schema, _, records = _load_tabular(args.data)
    if any(r.label is None for r in records):
        print("every evaluation record needs a label", file=sys.stderr)
        return 2
    dataset, _ = prepare_text_dataset(
        schema, records, vocab=vocab, max_len=model.config.max_len
    )
    print(f"accuracy={evaluate_accuracy(model, dataset):.4f}")
    return 0


def _cmd_caption(args: argparse.Namespace) -> int:
    seq = load_frame_sequence(args.frames)
    captioner = None
    client = None
    if args.backend:
        import shlex

        from .backend import BackendCaptioner, BackendClient

        client = BackendClient(argv=shlex.split(args.backend), timeout_ms=args.timeout_ms)
        captioner = BackendCaptioner(client)
    try:
        result = run_caption_chain(
            seq,
            captioner=captioner,
            task=RefineTask(args.task),
            stride=args.stride,
            max_frames=args.max_frames,
        )
    finally:
        if client is not None:
            client.close()
    for index, caption in result.frame_captions:
        print(f"frame[{index}]={caption}")
    print(f"refined={result.refined_text}")
    print(f"provenance={result.provenance}")
    return 0


def _profile_fixture_rows(path: str) -> list[MetricsRow]:
    rows = []
    for doc in _read_ndjson(path):
        rows.append(
            MetricsRow(
                modality=Modality(doc["modality"]),
                accuracy_pct=doc.get("accuracy_pct"),
                mac_gop=float(doc["mac_gop"]),
                task=doc["task"],
                latency_ms=float(doc["latency_ms"]),
            )
        )
    return rows


def _profile_live_rows(config_path: str, reps: int) -> list[MetricsRow]:
    """Time representative single-input inference for each configured model."""
    config = load_config(config_path)
    gateway = gateway_from_config(config)
    rows = []
    try:
        for modality in (Modality.TIME_SERIES, Modality.AUDIO, Modality.VIDEO):
            loaded = gateway._models.get(modality)  # noqa: SLF001 — operator tooling
            if loaded is None:
                continue
            model = loaded.model
            cfg = model.config
            if cfg.vocab_size is not None:
                ids = np.full(cfg.max_len, UNK, dtype=np.int64)
                ids[0] = CLS
                inputs = (ids, np.ones(cfg.max_len, dtype=bool))
            else:
                rng = np.random.default_rng(0)
                inputs = (
                    rng.normal(size=(cfg.max_len, cfg.feature_dim)),
                    np.ones(cfg.max_len, dtype=bool),
                )
            start = time.perf_counter()
            for _ in range(reps):
                forward_classify(model, inputs)
            latency_ms = (time.perf_counter() - start) / reps * 1000.0
            accuracy = gateway._eval_accuracy.get(modality)  # noqa: SLF001
            rows.append(
                MetricsRow(
                    modality=modality,
                    accuracy_pct=None if accuracy is None else accuracy * 100.0,
                    mac_gop=macs_to_gop(count_macs(cfg, cfg.max_len)),
                    task=loaded.label_schema.task_name,
                    latency_ms=latency_ms,
                )
            )
    finally:
        gateway.stop()
    return rows


def _cmd_profile(args: argparse.Namespace) -> int:
    if args.fixture:
        rows = _profile_fixture_rows(args.fixture)
    else:
        rows = _profile_live_rows(args.config, args.reps)
    print(REPORT_HEADER)
    for row in rows:
        print(metrics_row_format(row))
    return 0


def _cmd_tokenize(args: argparse.Namespace) -> int:
    if args.vocab:
        vocab = load_vocab(args.vocab)
    else:
        vocab = build_vocab([args.text])
    encoded = encode(args.text, vocab, max_len=args.max_len)
    tokens = [vocab.token_of(i) for i in encoded.ids]
    print("ids=" + " ".join(str(i) for i in encoded.ids))
    print("tokens=" + " ".join(tokens))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itsgw", description="Multimodal sensor inference gateway"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True)
    p_serve.set_defaults(func=_cmd_serve)

    p_train = sub.add_parser("train", help="train a classifier from NDJSON records")
    p_train.add_argument("--modality", required=True, choices=[m.value for m in Modality])
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--epochs", type=int, default=3)
    p_train.add_argument("--batch-size", type=int, default=16)
    p_train.add_argument("--max-steps", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--layers", type=int, default=2)
    p_train.add_argument("--heads", type=int, default=4)
    p_train.add_argument("--d-model", type=int, default=32)
    p_train.add_argument("--d-ff", type=int, default=64)
    p_train.add_argument("--max-len", type=int, default=16)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on labeled records")
    p_eval.add_argument("--ckpt", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.set_defaults(func=_cmd_eval)

    p_caption = sub.add_parser("caption", help="caption a directory of PGM frames")
    p_caption.add_argument("--frames", required=True)
    p_caption.add_argument("--backend", default=None, help="external backend command")
    p_caption.add_argument("--task", default=RefineTask.SUMMARIZE.value,
                           choices=[t.value for t in RefineTask])
    p_caption.add_argument("--stride", type=int, default=1)
    p_caption.add_argument("--max-frames", type=int, default=16)
    p_caption.add_argument("--timeout-ms", type=int, default=10_000)
    p_caption.set_defaults(func=_cmd_caption)

    p_profile = sub.add_parser("profile", help="print the per-modality metrics table")
    p_profile.add_argument("--config", default=None)
    p_profile.add_argument("--fixture", default=None,
                           help="NDJSON rows to format instead of live measurement")
    p_profile.add_argument("--reps", type=int, default=20)
    p_profile.set_defaults(func=_cmd_profile)

    p_tok = sub.add_parser("tokenize", help="encode text and show ids/tokens")
    p_tok.add_argument("--text", required=True)
    p_tok.add_argument("--vocab", default=None)
    p_tok.add_argument("--max-len", type=int, default=64)
    p_tok.set_defaults(func=_cmd_tokenize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "profile" and not (args.fixture or args.config):
        parser.error("profile needs --config or --fixture")
    try:
        return args.func(args)
    except ItsgwError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
