"""Frame sampling and the caption-then-refine chain.

The chain composes sample_frames, a per-frame captioner, and a refiner.
External captioners can time out or misbehave; when fallback is enabled
the whole chain reruns on the builtin provider so a flaky backend never
fails a video job.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core.errors import (
    BackendProtocolError,
    BackendRemoteError,
    BackendTimeout,
    ItsgwError,
)
from ..core.records import FrameSequence
from .captioner import BuiltinCaptioner, Captioner, RefineTask


class EmptySequence(ItsgwError):
    pass


@dataclass(frozen=True)
class CaptionChainResult:
    frame_captions: tuple[tuple[int, str], ...]  # (frame index, caption)
    refined_text: str
    task: RefineTask
    provenance: str  # "builtin" or the external backend id

    def __post_init__(self) -> None:
        if not self.refined_text:
            raise ItsgwError("refined_text must be non-empty on success")


def sample_frames(seq: FrameSequence, stride: int = 1, max_frames: int = 16) -> list[int]:
    """Indices 0, stride, 2*stride, ... capped at max_frames and at the end."""
    if stride < 1 or max_frames < 1:
        raise ItsgwError(f"stride and max_frames must be >= 1, got {stride}, {max_frames}")
    if not seq.frames:
        raise EmptySequence("no frames to sample")
    return list(range(0, len(seq.frames), stride))[:max_frames]


def _run(seq: FrameSequence, captioner: Captioner, task: RefineTask,
         stride: int, max_frames: int) -> CaptionChainResult:
    indices = sample_frames(seq, stride, max_frames)
    captions = [(i, captioner.caption(seq.frames[i])) for i in indices]
    refined = captioner.refine([c for _, c in captions], task)
    info = captioner.info
    return CaptionChainResult(
        frame_captions=tuple(captions),
        refined_text=refined,
        task=task,
        provenance="builtin" if info.kind == "builtin" else info.name,
    )


def run_caption_chain(
    seq: FrameSequence,
    captioner: Captioner | None = None,
    task: RefineTask = RefineTask.SUMMARIZE,
    stride: int = 1,
    max_frames: int = 16,
    fallback_to_builtin: bool = True,
) -> CaptionChainResult:
    captioner = captioner if captioner is not None else BuiltinCaptioner()
    task = RefineTask(task)
    try:
        return _run(seq, captioner, task, stride, max_frames)
    except (BackendTimeout, BackendProtocolError, BackendRemoteError):
        if not fallback_to_builtin or captioner.info.kind == "builtin":
            raise
        return _run(seq, BuiltinCaptioner(), task, stride, max_frames)
