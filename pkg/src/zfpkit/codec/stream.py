"""Container serialization: header, per-block bit stream, plane coder.

Wire format (all multi-byte fields little-endian):

    magic   "ZFPK"
    u8      version (currently 1)
    u8      d
    u16     k
    u16     q
    u16     beta
    u8      b_e            exponent field width in bits
    u8      flags          bit 0: wide-beta opt-in was active
    u32*d   dims           grid extents, slowest axis first

then one bit-packed record per block, MSB-first within each byte and
byte-aligned per block:

    1 bit   all-zero flag (1 -> nothing else follows for this block)
    b_e bits  biased block exponent e_max + (2**(b_e-1) - 1)
    beta planes, most significant digit position (q+1) first; each plane is
    a single 0 test bit when all 4**d bits are zero, otherwise a 1 followed
    by the raw plane bits in coefficient order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .blocks import GridShapeError, block_count, partition, unpartition
from .params import CodecParams, ParamError
from .pipeline import NegaBlock, compress_block, decompress_block

MAGIC = b"ZFPK"
VERSION = 1
DEFAULT_EXPONENT_BITS = 11  # covers IEEE-double block exponents with headroom

_FLAG_WIDE_BETA = 0x01


class ContainerError(ValueError):
    """Malformed or unsupported container data."""


class DecodeError(ContainerError):
    """Container payload damaged; carries the failing block index."""

    def __init__(self, message: str, block: int | None = None, plane: int | None = None):
        where = []
        if block is not None:
            where.append(f"block {block}")
        if plane is not None:
            where.append(f"plane {plane}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.block = block
        self.plane = plane


class BitWriter:
    """MSB-first bit packer."""

    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._n = 0

    def write_bit(self, bit: int):
        self._acc = (self._acc << 1) | (bit & 1)
        self._n += 1
        if self._n == 8:
            self._bytes.append(self._acc)
            self._acc = 0
            self._n = 0

    def write_bits(self, value: int, width: int):
        for i in range(width - 1, -1, -1):
            self.write_bit((value >> i) & 1)

    def align(self):
        """Pad with zero bits to the next byte boundary."""
        while self._n:
            self.write_bit(0)

    def getvalue(self) -> bytes:
        self.align()
        return bytes(self._bytes)

    @property
    def bit_length(self) -> int:
        return 8 * len(self._bytes) + self._n


class BitReader:
    """MSB-first bit unpacker over a bytes buffer."""

    def __init__(self, data: bytes, start_byte: int = 0):
        self._data = data
        self._pos = 8 * start_byte

    def read_bit(self) -> int:
        byte = self._pos >> 3
        if byte >= len(self._data):
            raise EOFError("bit stream exhausted")
        bit = (self._data[byte] >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def read_bits(self, width: int) -> int:
        v = 0
        for _ in range(width):
            v = (v << 1) | self.read_bit()
        return v

    def align(self):
        self._pos = (self._pos + 7) & ~7


@dataclass(frozen=True)
class ArrayHeader:
    """Decoded container header."""

    dims: tuple[int, ...]
    k: int
    q: int
    beta: int
    b_e: int = DEFAULT_EXPONENT_BITS
    wide_beta: bool = False
    version: int = VERSION
    magic: bytes = MAGIC

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def block_count(self) -> int:
        return block_count(self.dims)

    def params(self) -> CodecParams:
        return CodecParams(self.d, self.k, self.q, self.beta,
                           allow_wide_beta=self.wide_beta)


def _pack_header(h: ArrayHeader) -> bytes:
    out = bytearray(MAGIC)
    flags = _FLAG_WIDE_BETA if h.wide_beta else 0
    out += struct.pack("<BBHHHBB", h.version, h.d, h.k, h.q, h.beta, h.b_e, flags)
    out += struct.pack(f"<{h.d}I", *h.dims)
    return bytes(out)


def read_header(data: bytes) -> tuple[ArrayHeader, int]:
    """Parse the header; returns (header, payload byte offset)."""
    if len(data) < 14:
        raise ContainerError("container shorter than fixed header")
    if data[:4] != MAGIC:
        raise ContainerError(f"bad magic {data[:4]!r}")
    version, d, k, q, beta, b_e, flags = struct.unpack_from("<BBHHHBB", data, 4)
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    if not 1 <= d <= 3:
        raise ContainerError(f"unsupported dimensionality {d}")
    end = 14 + 4 * d
    if len(data) < end:
        raise ContainerError("container truncated inside dims")
    dims = struct.unpack_from(f"<{d}I", data, 14)
    if any(n < 1 for n in dims):
        raise ContainerError(f"non-positive dims {dims}")
    header = ArrayHeader(dims=tuple(dims), k=k, q=q, beta=beta, b_e=b_e,
                         wide_beta=bool(flags & _FLAG_WIDE_BETA), version=version)
    try:
        header.params()
    except ParamError as e:
        raise ContainerError(f"inconsistent header parameters: {e}") from e
    return header, end


@dataclass(frozen=True)
class CompressedBlock:
    """One block after plane coding.

    ``payload`` holds only the coded plane bits (MSB-first, zero-padded to a
    byte); the zero flag and the exponent live beside it so an all-zero
    block really has an empty payload.
    """

    zero_flag: bool
    e_max: int | None
    beta: int
    payload: bytes
    payload_bits: int

    def __post_init__(self):
        if self.zero_flag and self.payload:
            raise ValueError("all-zero block must carry no payload")


def _write_planes(nb: NegaBlock, p: CodecParams, writer: BitWriter):
    # one test bit per plane; nonzero planes follow raw in coefficient order
    n = len(nb.digits)
    for pos in range(p.q + 1, p.q + 1 - p.beta, -1):
        plane = 0
        for u in nb.digits:
            plane = (plane << 1) | ((u >> pos) & 1)
        if plane:
            writer.write_bit(1)
            writer.write_bits(plane, n)
        else:
            writer.write_bit(0)


def _read_planes(reader: BitReader, p: CodecParams, e_max: int,
                 block_index: int | None = None) -> NegaBlock:
    n = p.n
    digits = [0] * n
    for plane_idx, pos in enumerate(range(p.q + 1, p.q + 1 - p.beta, -1)):
        try:
            if reader.read_bit():
                plane = reader.read_bits(n)
            else:
                plane = 0
        except EOFError as e:
            raise DecodeError("stream ends inside plane payload",
                              block=block_index, plane=plane_idx) from e
        if plane:
            for c in range(n):
                if (plane >> (n - 1 - c)) & 1:
                    digits[c] |= 1 << pos
    return NegaBlock(tuple(digits), e_max)


def encode_planes(nb: NegaBlock, p: CodecParams) -> CompressedBlock:
    """Code the kept planes of one block losslessly."""
    if nb.is_zero:
        return CompressedBlock(True, None, p.beta, b"", 0)
    writer = BitWriter()
    _write_planes(nb, p, writer)
    nbits = writer.bit_length
    return CompressedBlock(False, nb.e_max, p.beta, writer.getvalue(), nbits)


def decode_planes(cb: CompressedBlock, p: CodecParams) -> NegaBlock:
    """Exact inverse of :func:`encode_planes` on the truncated digit masks."""
    if cb.beta != p.beta:
        raise DecodeError(f"record carries beta={cb.beta}, params say {p.beta}")
    if cb.zero_flag:
        return NegaBlock((0,) * p.n, None)
    return _read_planes(BitReader(cb.payload), p, cb.e_max)


def _write_block_record(cb: CompressedBlock, writer: BitWriter, b_e: int):
    """Container layout: zero flag, biased exponent, then the coded planes."""
    if cb.zero_flag:
        writer.write_bit(1)
        return
    writer.write_bit(0)
    bias = (1 << (b_e - 1)) - 1
    stored = cb.e_max + bias
    if not 0 <= stored < (1 << b_e):
        raise ParamError(
            f"block exponent {cb.e_max} does not fit a {b_e}-bit biased field; raise b_e")
    writer.write_bits(stored, b_e)
    reader = BitReader(cb.payload)
    for _ in range(cb.payload_bits):
        writer.write_bit(reader.read_bit())


def _read_block_record(reader: BitReader, p: CodecParams, b_e: int,
                       block_index: int | None = None) -> NegaBlock:
    try:
        if reader.read_bit():
            return NegaBlock((0,) * p.n, None)
        e_max = reader.read_bits(b_e) - ((1 << (b_e - 1)) - 1)
    except EOFError as e:
        raise DecodeError("stream ends inside block prologue", block=block_index) from e
    return _read_planes(reader, p, e_max, block_index)


def compress(grid, params: CodecParams, b_e: int = DEFAULT_EXPONENT_BITS) -> bytes:
    """Compress a d-dimensional array into a self-describing container."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != params.d:
        raise GridShapeError(f"grid has {grid.ndim} axes but params.d = {params.d}")
    if grid.size == 0:
        raise GridShapeError("empty grid")
    if not np.isfinite(grid).all():
        raise ValueError("grid contains NaN or infinity; only finite values compress")
    if not 2 <= b_e <= 32:
        raise ParamError(f"b_e must be in [2, 32], got {b_e}")
    header = ArrayHeader(dims=tuple(grid.shape), k=params.k, q=params.q,
                         beta=params.beta, b_e=b_e, wide_beta=params.allow_wide_beta)
    out = bytearray(_pack_header(header))
    for values in partition(grid):
        writer = BitWriter()
        cb = encode_planes(compress_block(values, params), params)
        _write_block_record(cb, writer, b_e)
        out += writer.getvalue()
    return bytes(out)


def decompress(data: bytes) -> np.ndarray:
    """Decompress a container back to a float64 array of the stored dims."""
    header, offset = read_header(data)
    params = header.params()
    reader = BitReader(data, start_byte=offset)
    blocks = []
    for i in range(header.block_count):
        reader.align()
        nb = _read_block_record(reader, params, header.b_e, block_index=i)
        _, values = decompress_block(nb, params)
        blocks.append(values)
    return unpartition(blocks, header.dims)
