"""Bit-vector reference pipeline: the oracle twin of the integer path.

Every stage here is expressed with the exact digit-string primitives from
:mod:`zfpkit.bitvec` (structural shifts, half-line truncations, the
floor-halving built from them), rather than machine-integer arithmetic.
Tests drive both paths in lockstep and require bit-identical intermediates,
so the fast path's two's-complement shortcuts are verified, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..bitvec import (
    BitString,
    Dyadic,
    Negabinary,
    SignedBinary,
    ZeroBlockError,
    fb_decode,
    fb_encode,
    fn_decode,
    fn_encode,
    round_half,
    sb_add,
    sb_sub,
    sb_value,
    shift,
    truncate,
)
from .params import CodecParams
from .pipeline import SEQUENCY_TABLES, _axis_lines, _inverse_table


@dataclass(frozen=True)
class RefTrace:
    """Reference-path intermediates for one block round trip."""

    e_max: int | None
    ell: int | None
    fp: tuple[SignedBinary, ...]
    transformed: tuple[SignedBinary, ...]
    permuted: tuple[SignedBinary, ...]
    nega: tuple[Negabinary, ...]
    truncated: tuple[Negabinary, ...]
    unpermuted: tuple[SignedBinary, ...]
    recovered: tuple[SignedBinary, ...]
    out_values: tuple[Dyadic, ...]

    @property
    def is_zero(self) -> bool:
        return self.e_max is None


_ZERO = SignedBinary(0, BitString.EMPTY)


def _truncate_at_radix(v: SignedBinary) -> SignedBinary:
    """Drop fractional positions of the magnitude (rounds toward zero)."""
    kept = truncate(v.magnitude, -1)
    if kept.is_empty:
        return _ZERO
    return SignedBinary(v.sign, kept)


def block_fp_forward_ref(values: Sequence, p: CodecParams):
    """Shared-exponent stage on bit vectors; returns (elements, e_max, ell)."""
    sbs = [fb_encode(v) for v in values]
    e_max = None
    for sb in sbs:
        if not sb.is_zero:
            hi = sb.magnitude.highest()
            if e_max is None or hi > e_max:
                e_max = hi
    if e_max is None:
        return tuple(_ZERO for _ in sbs), None, None
    ell = e_max - p.q + 1
    out = []
    for sb in sbs:
        if sb.is_zero:
            out.append(sb)
        else:
            out.append(_truncate_at_radix(SignedBinary(sb.sign, shift(sb.magnitude, ell))))
    return tuple(out), e_max, ell


def _lift_forward_ref(a: list, i0: int, i1: int, i2: int, i3: int):
    a[i0] = round_half(sb_add(a[i0], a[i3]))
    a[i3] = sb_sub(a[i3], a[i0])
    a[i2] = round_half(sb_add(a[i2], a[i1]))
    a[i1] = sb_sub(a[i1], a[i2])
    a[i0] = round_half(sb_add(a[i0], a[i2]))
    a[i2] = sb_sub(a[i2], a[i0])
    a[i3] = round_half(sb_add(a[i3], a[i1]))
    a[i1] = sb_sub(a[i1], a[i3])
    a[i3] = sb_add(a[i3], round_half(a[i1]))
    a[i1] = sb_sub(a[i1], round_half(a[i3]))


def _double(v: SignedBinary) -> SignedBinary:
    if v.is_zero:
        return v
    return SignedBinary(v.sign, shift(v.magnitude, -1))


def _lift_inverse_ref(a: list, i0: int, i1: int, i2: int, i3: int):
    a[i1] = sb_add(a[i1], round_half(a[i3]))
    a[i3] = sb_sub(a[i3], round_half(a[i1]))
    a[i1] = sb_add(a[i1], a[i3])
    a[i3] = _double(a[i3])
    a[i3] = sb_sub(a[i3], a[i1])
    a[i2] = sb_add(a[i2], a[i0])
    a[i0] = _double(a[i0])
    a[i0] = sb_sub(a[i0], a[i2])
    a[i1] = sb_add(a[i1], a[i2])
    a[i2] = _double(a[i2])
    a[i2] = sb_sub(a[i2], a[i1])
    a[i3] = sb_add(a[i3], a[i0])
    a[i0] = _double(a[i0])
    a[i0] = sb_sub(a[i0], a[i3])


def transform_forward_ref(elems: Sequence[SignedBinary], p: CodecParams) -> tuple[SignedBinary, ...]:
    vals = list(elems)
    for axis in reversed(range(p.d)):
        for line in _axis_lines(p.d, axis):
            _lift_forward_ref(vals, *line)
    return tuple(vals)


def transform_inverse_ref(elems: Sequence[SignedBinary], p: CodecParams) -> tuple[SignedBinary, ...]:
    vals = list(elems)
    for axis in range(p.d):
        for line in _axis_lines(p.d, axis):
            _lift_inverse_ref(vals, *line)
    return tuple(vals)


def sequency_permute_ref(elems, p: CodecParams):
    table = SEQUENCY_TABLES[p.d]
    return tuple(elems[src] for src in table)


def sequency_unpermute_ref(elems, p: CodecParams):
    table = _inverse_table(p.d)
    return tuple(elems[src] for src in table)


def to_negabinary_ref(elems: Sequence[SignedBinary]) -> tuple[Negabinary, ...]:
    return tuple(fn_encode(sb_value(sb)) for sb in elems)


def from_negabinary_ref(elems: Sequence[Negabinary]) -> tuple[SignedBinary, ...]:
    return tuple(SignedBinary.from_int(fn_decode(nb)) for nb in elems)


def bitplane_truncate_ref(elems: Sequence[Negabinary], p: CodecParams) -> tuple[Negabinary, ...]:
    cutoff = p.q + 1 - p.beta
    return tuple(Negabinary(truncate(nb.digits, cutoff)) for nb in elems)


def significand_truncate_ref(v: SignedBinary, k: int) -> SignedBinary:
    if v.is_zero:
        return v
    kept = truncate(v.magnitude, v.magnitude.highest() - k)
    return SignedBinary(v.sign, kept)


def roundtrip_ref(values: Sequence, p: CodecParams) -> RefTrace:
    """Full reference round trip, keeping all intermediates."""
    fp, e_max, ell = block_fp_forward_ref(values, p)
    if e_max is None:
        zeros_n = tuple(fn_encode(0) for _ in fp)
        return RefTrace(None, None, fp, fp, fp, zeros_n, zeros_n, fp, fp,
                        tuple(Dyadic(0) for _ in fp))
    transformed = transform_forward_ref(fp, p)
    permuted = sequency_permute_ref(transformed, p)
    nega = to_negabinary_ref(permuted)
    truncated = bitplane_truncate_ref(nega, p)
    unpermuted = sequency_unpermute_ref(from_negabinary_ref(truncated), p)
    recovered = transform_inverse_ref(unpermuted, p)
    out = []
    for sb in recovered:
        fl = significand_truncate_ref(sb, p.k)
        if fl.is_zero:
            out.append(Dyadic(0))
        else:
            out.append(fb_decode(SignedBinary(fl.sign, shift(fl.magnitude, -ell))))
    return RefTrace(e_max, ell, fp, transformed, permuted, nega, truncated,
                    unpermuted, recovered, tuple(out))
