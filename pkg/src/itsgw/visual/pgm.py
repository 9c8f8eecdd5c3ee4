"""Binary P5 PGM reading and writing.

Frame directories hold `NNNNNN.pgm` files whose lexicographic order is
the temporal order; codec decoding is out of scope.
"""

from __future__ import annotations

from pathlib import Path

from ..core.errors import ItsgwError
from ..core.records import Frame, FrameSequence


class MalformedImage(ItsgwError):
    pass


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First `count` whitespace-separated tokens, skipping # comments."""
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i >= len(data):
            raise MalformedImage("truncated header")
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    return tokens, i


def read_pgm(data: bytes) -> Frame:
    tokens, end = _header_tokens(data, 4)
    magic, width_s, height_s, maxval_s = tokens
    if magic != b"P5":
        raise MalformedImage(f"expected P5 magic, got {magic!r}")
    try:
        width, height, maxval = int(width_s), int(height_s), int(maxval_s)
    except ValueError as exc:
        raise MalformedImage(f"non-numeric header field: {exc}") from exc
    if maxval != 255:
        raise MalformedImage(f"only maxval 255 supported, got {maxval}")
    if end >= len(data) or not data[end : end + 1].isspace():
        raise MalformedImage("missing whitespace before pixel data")
    pixels = data[end + 1 : end + 1 + width * height]
    if len(pixels) != width * height:
        raise MalformedImage(
            f"expected {width * height} pixel bytes, got {len(pixels)}"
        )
    return Frame(width=width, height=height, pixels=pixels)


def encode_pgm(frame: Frame) -> bytes:
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode()
    return header + frame.pixels


def write_pgm(frame: Frame, path: str | Path) -> None:
    Path(path).write_bytes(encode_pgm(frame))


def load_frame_sequence(directory: str | Path) -> FrameSequence:
    """Frames from `*.pgm` files in lexicographic (temporal) order."""
    directory = Path(directory)
    frames = tuple(
        read_pgm(path.read_bytes()) for path in sorted(directory.glob("*.pgm"))
    )
    return FrameSequence(frames=frames, source_id=directory.name)
