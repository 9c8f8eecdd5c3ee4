"""Frame ingestion, captioning, and the caption-refine chain."""

from .captioner import (
    CONTRAST_HIGH_ABOVE,
    TONE_DARK_BELOW,
    TONE_DIM_BELOW,
    BuiltinCaptioner,
    Captioner,
    CaptionerInfo,
    EmptyCaptionList,
    ImageTooSmall,
    RefineTask,
    builtin_caption,
    builtin_refine,
    collapse_consecutive,
)
from .chain import CaptionChainResult, EmptySequence, run_caption_chain, sample_frames
from .pgm import MalformedImage, encode_pgm, load_frame_sequence, read_pgm, write_pgm

__all__ = [
    "CONTRAST_HIGH_ABOVE",
    "TONE_DARK_BELOW",
    "TONE_DIM_BELOW",
    "BuiltinCaptioner",
    "CaptionChainResult",
    "Captioner",
    "CaptionerInfo",
    "EmptyCaptionList",
    "EmptySequence",
    "ImageTooSmall",
    "MalformedImage",
    "RefineTask",
    "builtin_caption",
    "builtin_refine",
    "collapse_consecutive",
    "encode_pgm",
    "load_frame_sequence",
    "read_pgm",
    "run_caption_chain",
    "sample_frames",
    "write_pgm",
]
