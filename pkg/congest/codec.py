"""
Wire format: every field is a non-negative integer stored in fixed-width words,
big-endian. A field occupies max(1, ceil(bit_length / word)) words.
"""
from __future__ import annotations

from typing import Sequence

from .exceptions import EncodingError


def word_bits(n: int) -> int:
    """Word size for an n-node network: enough bits for any id in 1..n."""
    return max(1, n.bit_length())


def field_words(value: int, word: int) -> int:
    if value < 0:
        raise EncodingError(f"negative value {value} cannot be encoded")
    return max(1, -(-value.bit_length() // word))


def layout(fields: Sequence[int], word: int) -> tuple[int, ...]:
    """Word count per field."""
    return tuple(field_words(value, word) for value in fields)


def message_bits(fields: Sequence[int], word: int) -> int:
    total = 0
    for value in fields:
        if value < 0:
            raise EncodingError(f"negative value {value} cannot be encoded")
        total += max(1, -(-value.bit_length() // word))
    return total * word


def encode(fields: Sequence[int], word: int) -> bytes:
    """Pack fields into consecutive words, most significant word first."""
    packed = 0
    total_words = 0
    for value in fields:
        count = field_words(value, word)
        packed = (packed << (count * word)) | value
        total_words += count
    total_bits = total_words * word
    return packed.to_bytes((total_bits + 7) // 8, 'big')


def decode(data: bytes, widths: Sequence[int], word: int) -> tuple[int, ...]:
    """Inverse of encode given the per-field word counts."""
    packed = int.from_bytes(data, 'big')
    values = []
    remaining = sum(widths) * word
    for count in widths:
        remaining -= count * word
        values.append((packed >> remaining) & ((1 << (count * word)) - 1))
    return tuple(values)
