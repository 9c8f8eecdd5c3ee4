"""Per-modality evaluation rows: accuracy, MAC cost, task, latency."""

from __future__ import annotations

from dataclasses import dataclass

from .records import Modality

REPORT_HEADER = "modality\taccuracy\tmac_gop\ttask\tlatency_ms"


@dataclass(frozen=True)
class MetricsRow:
    modality: Modality
    accuracy_pct: float | None  # None for unlabeled workloads
    mac_gop: float
    task: str
    latency_ms: float

    def __post_init__(self) -> None:
        if self.accuracy_pct is not None and not 0.0 <= self.accuracy_pct <= 100.0:
            raise ValueError(f"accuracy {self.accuracy_pct} outside [0, 100]")
        if self.mac_gop < 0:
            raise ValueError("mac_gop must be non-negative")
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


def format_gop(value: float) -> str:
    """One decimal place, widened just enough to keep a significant digit.

    1.8 -> "1.8", 0.0168 -> "0.02", 0 -> "0.0".
    """
    if value == 0.0:
        return "0.0"
    for decimals in range(1, 13):
        text = f"{value:.{decimals}f}"
        if float(text) != 0.0:
            return text
    return f"{value:.12f}"


def metrics_row_format(row: MetricsRow) -> str:
    """Tab-separated line: modality, accuracy%, GOP, task, latency."""
    accuracy = "-" if row.accuracy_pct is None else f"{row.accuracy_pct:.2f}%"
    return "\t".join(
        [
            row.modality.value,
            accuracy,
            format_gop(row.mac_gop),
            row.task,
            f"{row.latency_ms:.1f}",
        ]
    )
