"""Record serialization and subword tokenization for the text head."""

from .serialize import EmptySchema, format_number, serialize_record
from .tokenizer import (
    CLS,
    CLS_TOKEN,
    PAD,
    PAD_TOKEN,
    SEP,
    SEP_TOKEN,
    SPECIAL_TOKENS,
    UNK,
    UNK_TOKEN,
    EmptyCorpus,
    EncodedText,
    UnknownId,
    Vocab,
    build_vocab,
    decode,
    encode,
    load_vocab,
    save_vocab,
)

__all__ = [
    "CLS",
    "CLS_TOKEN",
    "PAD",
    "PAD_TOKEN",
    "SEP",
    "SEP_TOKEN",
    "SPECIAL_TOKENS",
    "UNK",
    "UNK_TOKEN",
    "EmptyCorpus",
    "EmptySchema",
    "EncodedText",
    "UnknownId",
    "Vocab",
    "build_vocab",
    "decode",
    "encode",
    "format_number",
    "load_vocab",
    "save_vocab",
    "serialize_record",
]
