"""Deterministic built-in captioner and refiner.

The captioner is a fixed statistical template over pixel statistics, a
stand-in for a learned model: the chain's orchestration is the product,
not the caption quality.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

import numpy as np

from ..core.errors import ItsgwError
from ..core.records import Frame

TONE_DARK_BELOW = 85.0
TONE_DIM_BELOW = 170.0
CONTRAST_HIGH_ABOVE = 16.0


class ImageTooSmall(ItsgwError):
    pass


class EmptyCaptionList(ItsgwError):
    pass


class RefineTask(str, Enum):
    SUMMARIZE = "summarize"
    TRANSLATE_PASSTHROUGH = "translate_passthrough"


@dataclass(frozen=True)
class CaptionerInfo:
    name: str
    kind: str  # "builtin" or "external"
    deterministic: bool = True


@runtime_checkable
class Captioner(Protocol):
    info: CaptionerInfo

    def caption(self, frame: Frame) -> str: ...

    def refine(self, captions: list[str], task: RefineTask) -> str: ...


def builtin_caption(frame: Frame) -> str:
    """"a <tone> scene with <contrast> contrast" from two pixel statistics."""
    if frame.width < 8 or frame.height < 8:
        raise ImageTooSmall(f"need at least 8x8, got {frame.width}x{frame.height}")
    pixels = (
        np.frombuffer(frame.pixels, dtype=np.uint8)
        .reshape(frame.height, frame.width)
        .astype(np.int64)
    )
    mean = float(pixels.mean())
    if mean < TONE_DARK_BELOW:
        tone = "dark"
    elif mean < TONE_DIM_BELOW:
        tone = "dim"
    else:
        tone = "bright"
    mean_diff = float(np.abs(np.diff(pixels, axis=1)).mean())
    contrast = "high" if mean_diff > CONTRAST_HIGH_ABOVE else "low"
    return f"a {tone} scene with {contrast} contrast"


def collapse_consecutive(captions: list[str]) -> list[str]:
    out: list[str] = []
    for caption in captions:
        if not out or out[-1] != caption:
            out.append(caption)
    return out


def builtin_refine(captions: list[str], task: RefineTask = RefineTask.SUMMARIZE) -> str:
    if not captions:
        raise EmptyCaptionList("nothing to refine")
    task = RefineTask(task)
    if task is RefineTask.SUMMARIZE:
        return "summary: " + "; ".join(collapse_consecutive(captions))
    return "; ".join(captions)  # pass-through hook for external backends


class BuiltinCaptioner:
    """Caption/refine provider satisfying the Captioner protocol."""

    info = CaptionerInfo(name="builtin", kind="builtin", deterministic=True)

    def caption(self, frame: Frame) -> str:
        return builtin_caption(frame)

    def refine(self, captions: list[str], task: RefineTask) -> str:
        return builtin_refine(captions, task)
