"""6-bit CRC outer code used to pick survivors out of a decode list.

The generator has at least two nonzero terms, so every single-bit error is
detected; that is exactly the property the sign-ambiguity resolution needs,
since a candidate and its last-bit-flipped twin differ in one payload bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CrcSpec", "crc_append", "crc_check"]


@dataclass(frozen=True)
class CrcSpec:
    """Coefficients MSB first; all-zero initial register, no reflection, no final xor."""

    degree: int = 6
    generator: tuple[int, ...] = (1, 1, 0, 0, 0, 0, 1)  # x^6 + x^5 + 1

    def __post_init__(self):
        if len(self.generator) != self.degree + 1:
            raise ValueError("generator needs degree + 1 coefficients")
        if self.generator[0] != 1:
            raise ValueError("generator must be monic")
        if sum(self.generator) < 2:
            raise ValueError("degenerate generator cannot detect single-bit errors")


_DEFAULT = CrcSpec()


def _remainder(bits: np.ndarray, spec: CrcSpec) -> np.ndarray:
    # remainder of bits(x) * x^degree modulo the generator, GF(2) long division
    reg = np.concatenate([bits, np.zeros(spec.degree, dtype=np.uint8)])
    gen = np.asarray(spec.generator, dtype=np.uint8)
    w = spec.degree + 1
    for i in range(len(bits)):
        if reg[i]:
            reg[i : i + w] ^= gen
    return reg[len(bits) :]


def crc_append(msg, spec: CrcSpec = _DEFAULT) -> np.ndarray:
    """Append the check bits: output = msg followed by msg(x)*x^degree mod generator."""
    msg = np.asarray(msg, dtype=np.uint8)
    return np.concatenate([msg, _remainder(msg, spec)])


def crc_check(word, spec: CrcSpec = _DEFAULT) -> bool:
    """True iff word(x) is divisible by the generator under the append convention."""
    word = np.asarray(word, dtype=np.uint8)
    if len(word) <= spec.degree:
        return False
    return bool(
        np.array_equal(_remainder(word[: -spec.degree], spec), word[-spec.degree :])
    )
