#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

Encodes the guest programs with a small standalone encoder and writes the
flat binaries together with their assembly listings, plus the synthetic
PGM used by the imaging tests. Deterministic: reruns are byte-identical.
"""

import struct
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def i_type(imm, rs1, f3, rd, op):
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op


def r_type(f7, rs2, rs1, f3, rd, op):
    return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | op


def u_type(imm20, rd, op):
    return ((imm20 & 0xFFFFF) << 12) | (rd << 7) | op


def b_type(imm, rs2, rs1, f3):
    imm &= 0x1FFF
    return (
        ((imm >> 12) & 1) << 31
        | ((imm >> 5) & 0x3F) << 25
        | rs2 << 20
        | rs1 << 15
        | f3 << 12
        | ((imm >> 1) & 0xF) << 8
        | ((imm >> 11) & 1) << 7
        | 0x63
    )


def j_type(imm, rd):
    imm &= 0x1FFFFF
    return (
        ((imm >> 20) & 1) << 31
        | ((imm >> 1) & 0x3FF) << 21
        | ((imm >> 11) & 1) << 20
        | ((imm >> 12) & 0xFF) << 12
        | rd << 7
        | 0x6F
    )


def addi(rd, rs1, imm):
    return i_type(imm, rs1, 0, rd, 0x13)


def lui(rd, imm20):
    return u_type(imm20, rd, 0x37)


def mul(rd, rs1, rs2):
    return r_type(1, rs2, rs1, 0, rd, 0x33)


def beq(rs1, rs2, off):
    return b_type(off, rs2, rs1, 0)


def jal(rd, off):
    return j_type(off, rd)


def csrrw(rd, csr, rs1):
    return i_type(csr, rs1, 1, rd, 0x73)


ECALL = 0x00000073


def emit(name, words, listing, extra_bytes=b""):
    out = ROOT / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    blob = b"".join(struct.pack("<I", w) for w in words) + extra_bytes
    (out / f"{name}.bin").write_bytes(blob)
    (out / f"{name}.s").write_text(listing)
    print(f"{name}.bin: {len(blob)} bytes")


def factorial_words():
    return [
        addi(10, 0, 10),       # a0 = 10
        addi(11, 0, 1),        # a1 = 1
        beq(10, 0, 16),        # loop: done when a0 == 0
        mul(11, 11, 10),       # a1 *= a0
        addi(10, 10, -1),      # a0 -= 1
        jal(0, -12),           # back to loop
        addi(10, 11, 0),       # a0 = a1
        addi(17, 0, 93),       # exit syscall
        ECALL,
    ]


FACTORIAL_LISTING = """\
# factorial(10), result returned as the exit code source in a0
        addi    a0, zero, 10
        addi    a1, zero, 1
loop:   beq     a0, zero, done
        mul     a1, a1, a0
        addi    a0, a0, -1
        jal     zero, loop
done:   addi    a0, a1, 0
        addi    a7, zero, 93
        ecall
"""

FACTORIAL_APPROX_LISTING = """\
# factorial(10) with the demo multiplier selected at error level 6
# (0x007E0003 = enable | slot 1 | error field 0x7E)
        lui     t0, 0x7e0
        addi    t0, t0, 3
        csrrw   zero, 0x801, t0
""" + "\n".join("        " + l.lstrip() if l and not l.startswith("#") else l
                for l in FACTORIAL_LISTING.splitlines()[1:]) + "\n"


def hello_words():
    msg = b"hello\n"
    words = [
        addi(17, 0, 64),       # write syscall
        addi(11, 0, 40),       # buffer address
        addi(12, 0, len(msg)),
        ECALL,
        addi(17, 0, 93),
        addi(10, 0, 0),
        ECALL,
        0x00000013,            # padding up to the buffer at 40
        0x00000013,
        0x00000013,
    ]
    assert len(words) * 4 == 40
    pad = (-len(msg)) % 4
    return words, msg + b"\x00" * pad


HELLO_LISTING = """\
# write "hello\\n" to the console, then exit 0
        addi    a7, zero, 64
        addi    a1, zero, msg
        addi    a2, zero, 6
        ecall
        addi    a7, zero, 93
        addi    a0, zero, 0
        ecall
        nop
        nop
        nop
msg:    .ascii  "hello\\n"
"""


def texture_pgm():
    """64x64 8-bit image with edges and texture at several scales."""
    w = h = 64
    pix = bytearray(w * h)
    state = 0x2545F4914F6CDD1D
    for y in range(h):
        for x in range(w):
            state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
            noise = (state >> 33) & 0x3F
            v = ((x ^ y) << 2) + (x << 1) + noise
            if 20 <= x < 44 and 20 <= y < 44:
                v += 80
            pix[y * w + x] = v & 0xFF
    out = ROOT / "data" / "images"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "texture64.pgm"
    path.write_bytes(b"P5\n64 64\n255\n" + bytes(pix))
    print(f"texture64.pgm: {path.stat().st_size} bytes")


def main():
    emit("factorial", factorial_words(), FACTORIAL_LISTING)
    approx_prefix = [
        lui(5, 0x7E0),
        addi(5, 5, 3),
        csrrw(0, 0x801, 5),
    ]
    # branch/jump offsets inside the loop are position-independent
    emit("factorial_approx", approx_prefix + factorial_words(),
         FACTORIAL_APPROX_LISTING)
    words, data = hello_words()
    emit("hello", words, HELLO_LISTING, data)
    texture_pgm()
    return 0


if __name__ == "__main__":
    sys.exit(main())
