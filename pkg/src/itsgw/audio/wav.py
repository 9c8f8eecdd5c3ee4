"""RIFF/WAVE ingestion for canonical PCM16 mono 16 kHz files.

Anything else is rejected rather than resampled or downmixed, so feature
extraction never runs on silently converted input.
"""

from __future__ import annotations

import struct

from ..core.errors import ItsgwError
from ..core.records import AudioClip

REQUIRED_RATE_HZ = 16000


class MalformedHeader(ItsgwError):
    pass


class UnsupportedChannels(ItsgwError):
    pass


class UnsupportedRate(ItsgwError):
    pass


class UnsupportedBitDepth(ItsgwError):
    pass


def _chunks(data: bytes):
    """Yield (chunk_id, payload) pairs from the RIFF body."""
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        payload = data[offset + 8 : offset + 8 + size]
        if len(payload) < size:
            raise MalformedHeader(f"chunk {chunk_id!r} truncated")
        yield chunk_id, payload
        offset += 8 + size + (size & 1)  # chunks are word-aligned


def load_wav(data: bytes) -> AudioClip:
    """Decode little-endian PCM16 samples from a WAV container."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("not a RIFF/WAVE container")
    fmt = None
    samples = None
    for chunk_id, payload in _chunks(data):
        if chunk_id == b"fmt ":
            if len(payload) < 16:
                raise MalformedHeader("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", payload, 0)
        elif chunk_id == b"data":
            if fmt is None:
                raise MalformedHeader("data chunk before fmt chunk")
            code, channels, rate, _byte_rate, _align, bits = fmt
            if code != 1:
                raise MalformedHeader(f"compressed format code {code}")
            if channels != 1:
                raise UnsupportedChannels(f"expected mono, got {channels} channels")
            if rate != REQUIRED_RATE_HZ:
                raise UnsupportedRate(f"expected {REQUIRED_RATE_HZ} Hz, got {rate}")
            if bits != 16:
                raise UnsupportedBitDepth(f"expected 16-bit, got {bits}")
            if len(payload) % 2:
                raise MalformedHeader("odd data-chunk length for 16-bit samples")
            samples = struct.unpack(f"<{len(payload) // 2}h", payload)
    if fmt is None or samples is None:
        raise MalformedHeader("missing fmt or data chunk")
    return AudioClip(samples=samples, sample_rate_hz=REQUIRED_RATE_HZ)
