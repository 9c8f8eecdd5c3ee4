"""Multimodal sensor inference gateway for transportation workloads.

Subpackages:
    core     shared domain types, job vocabulary, metrics rows
    nn       dense tensor ops and differentiable layers with gradient checking
    text     tabular-to-text serialization and subword tokenizer
    audio    WAV ingestion, FFT spectrogram features, batch collation
    vision   frame sampling and the caption -> refine chain
    encoder  transformer classifier, AdamW training, MAC counting
    fusion   late fusion of class distributions and the feedback trigger
    gateway  async job service: queue, workers, job log, HTTP API, CLI
"""

__version__ = "0.1.0"
