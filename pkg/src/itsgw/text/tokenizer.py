"""Trained subword vocabulary and greedy longest-match encoding.

Vocabulary ids are contiguous: [PAD]=0, [UNK]=1, [CLS]=2, [SEP]=3, then
corpus tokens by descending count (ties broken lexicographically).
Continuation pieces carry a "##" prefix and arise from words whose longest
proper prefix is itself a corpus word, mirroring greedy longest-match
segmentation at desk scale.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from ..core.errors import ItsgwError

PAD, UNK, CLS, SEP = 0, 1, 2, 3
PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN = "[PAD]", "[UNK]", "[CLS]", "[SEP]"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN)


class EmptyCorpus(ItsgwError):
    pass


class UnknownId(ItsgwError):
    pass


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]  # index = id; tokens[0:4] are the specials
    min_frequency: int = 1

    def __post_init__(self) -> None:
        if tuple(self.tokens[:4]) != SPECIAL_TOKENS:
            raise ItsgwError(f"first four tokens must be {SPECIAL_TOKENS}")
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int | None:
        return self._ids.get(token)

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise UnknownId(f"id {idx} outside vocab of {len(self.tokens)}")
        return self.tokens[idx]


@dataclass(frozen=True)
class EncodedText:
    ids: tuple[int, ...]
    mask: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.mask):
            raise ItsgwError("ids and mask must be the same length")


def _words(corpus: list[str]) -> list[str]:
    out: list[str] = []
    for text in corpus:
        out.extend(u for u in text.split() if u not in SPECIAL_TOKENS)
    return out


def build_vocab(corpus: list[str], min_frequency: int = 1, max_size: int = 4096) -> Vocab:
    """Count whitespace words plus derived "##" suffix pieces and rank them.

    A word whose longest proper prefix is itself a corpus word contributes
    the piece "##"+remainder at the word's own count. Tokens with count >=
    min_frequency are kept, ordered by (-count, token), truncated to
    max_size entries including the four specials.
    """
    if max_size <= 4:
        raise ItsgwError(f"max_size must exceed 4, got {max_size}")
    words = _words(corpus)
    if not words:
        raise EmptyCorpus("no words in corpus")
    counts = Counter(words)
    merged = Counter(counts)
    for word, count in counts.items():
        for cut in range(len(word) - 1, 0, -1):  # longest proper prefix first
            if word[:cut] in counts:
                merged["##" + word[cut:]] += count
                break
    kept = sorted(
        (t for t, c in merged.items() if c >= min_frequency),
        key=lambda t: (-merged[t], t),
    )
    return Vocab(
        tokens=SPECIAL_TOKENS + tuple(kept[: max_size - 4]),
        min_frequency=min_frequency,
    )


def _wordpiece(word: str, vocab: Vocab) -> list[int] | None:
    """Greedy longest-match split; None when any remainder is unmatched."""
    ids: list[int] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while end > start:
            candidate = word[start:end] if start == 0 else "##" + word[start:end]
            idx = vocab.id_of(candidate)
            if idx is not None:
                match = idx
                break
            end -= 1
        if match is None:
            return None
        ids.append(match)
        start = end
    return ids


def encode(text: str, vocab: Vocab, max_len: int = 64) -> EncodedText:
    """CLS + body (truncated to max_len-2) + SEP, padded to max_len.

    A literal "[SEP]" unit (the record field separator) maps to the SEP id;
    other reserved literals and unmatched units map to UNK.
    """
    if max_len < 4:
        raise ItsgwError(f"max_len must be at least 4, got {max_len}")
    body: list[int] = []
    for unit in text.split():
        if unit == SEP_TOKEN:
            body.append(SEP)
        elif unit in SPECIAL_TOKENS:
            body.append(UNK)
        else:
            piece_ids = _wordpiece(unit, vocab)
            body.extend(piece_ids if piece_ids is not None else [UNK])
    body = body[: max_len - 2]
    ids = [CLS] + body + [SEP]
    mask = [1] * len(ids)
    pad = max_len - len(ids)
    ids.extend([PAD] * pad)
    mask.extend([0] * pad)
    return EncodedText(ids=tuple(ids), mask=tuple(mask))


def decode(encoded: EncodedText | list[int] | tuple[int, ...], vocab: Vocab) -> str:
    """Inverse of encode up to UNK loss: wrapper and padding dropped,
    interior separators kept, "##" pieces re-joined."""
    ids = list(encoded.ids if isinstance(encoded, EncodedText) else encoded)
    for idx in ids:
        vocab.token_of(idx)  # range check
    while ids and ids[-1] == PAD:
        ids.pop()
    if ids and ids[-1] == SEP:
        ids.pop()
    if ids and ids[0] == CLS:
        ids.pop(0)
    parts: list[str] = []
    for idx in ids:
        if idx == PAD:
            continue
        token = vocab.token_of(idx)
        if token.startswith("##") and parts:
            parts[-1] += token[2:]
        else:
            parts.append(token)
    return " ".join(parts)


def save_vocab(vocab: Vocab, path: str | Path) -> None:
    """One token per line; line number = id."""
    Path(path).write_text("\n".join(vocab.tokens) + "\n")


def load_vocab(path: str | Path, min_frequency: int = 1) -> Vocab:
    tokens = Path(path).read_text().splitlines()
    return Vocab(tokens=tuple(tokens), min_frequency=min_frequency)
