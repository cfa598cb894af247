"""Minimal binary PPM (P6) and PBM (P4) readers and writers."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def encode_pbm(mask: np.ndarray) -> bytes:
    # PBM convention: 1 = black. We store opaque as 1.
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    return b"P4\n%d %d\n" % (w, h) + np.packbits(mask, axis=1).tobytes()


def _header(data: bytes, fields: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < fields:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos + 1


def decode_ppm(data: bytes) -> np.ndarray:
    tokens, offset = _header(data, 4)
    if tokens[0] != b"P6" or tokens[3] != b"255":
        raise ValueError("only 8-bit binary PPM (P6) is supported")
    w, h = int(tokens[1]), int(tokens[2])
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=offset)
    return pixels.reshape(h, w, 3).copy()


def decode_pbm(data: bytes) -> np.ndarray:
    tokens, offset = _header(data, 3)
    if tokens[0] != b"P4":
        raise ValueError("only binary PBM (P4) is supported")
    w, h = int(tokens[1]), int(tokens[2])
    row_bytes = (w + 7) // 8
    packed = np.frombuffer(data, dtype=np.uint8, count=row_bytes * h, offset=offset)
    return np.unpackbits(packed.reshape(h, row_bytes), axis=1)[:, :w].astype(bool)


def write_ppm(path: Path, rgb: np.ndarray) -> None:
    Path(path).write_bytes(encode_ppm(rgb))


def read_ppm(path: Path) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def write_pbm(path: Path, mask: np.ndarray) -> None:
    Path(path).write_bytes(encode_pbm(mask))


def read_pbm(path: Path) -> np.ndarray:
    return decode_pbm(Path(path).read_bytes())
