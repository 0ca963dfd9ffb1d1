"""Composite-field arithmetic for the AES S-box.

GF(2^8) is decomposed as a tower of quadratic extensions in normal basis:

    GF(2^2)  basis [W^2, W],    W a primitive cube root of unity
    GF(2^4)  basis [Z^4, Z],    Z^2 + Z + N = 0,  N = W^2        (value 2)
    GF(2^8)  basis [Y^16, Y],   Y^2 + Y + NU = 0, NU = W         (value 1)

Every extension has trace 1, so the multiplicative unity is the all-ones
bit pattern at each level (0x3, 0xF, 0xFF).  A 2-bit value b1b0 encodes
b1*W^2 + b0*W; 4-bit and 8-bit values stack the same way, high half first.

The isomorphism with the AES polynomial basis (x^8+x^4+x^3+x+1) is fixed
by mapping the AES generator 0x02 to the smallest root of the AES
polynomial inside the tower.  The resulting 8x8 GF(2) matrices are
hard-coded below and pinned by the exhaustive S-box equivalence test.

All tables are plain numpy uint8 arrays so that every operation works
elementwise on arrays of any shape as well as on ints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# ---------------------------------------------------------------------------
# GF(2^2), normal basis [W^2, W]

UNITY4 = 0x3
N_SCALE = 0x2  # norm of GF(2^4)/GF(2^2)


def _g4_mul_int(s: int, t: int) -> int:
    s1, s0 = (s >> 1) & 1, s & 1
    t1, t0 = (t >> 1) & 1, t & 1
    c = (s1 ^ s0) & (t1 ^ t0)
    return ((c ^ (s1 & t1)) << 1) | (c ^ (s0 & t0))


G4_MUL = np.array([[_g4_mul_int(s, t) for t in range(4)] for s in range(4)], dtype=np.uint8)
G4_SQ = np.array([0, 2, 1, 3], dtype=np.uint8)      # squaring swaps the bits
G4_INV = G4_SQ                                      # x^-1 = x^2 in GF(4)
G4_SCALE_N = G4_MUL[N_SCALE]

# ---------------------------------------------------------------------------
# GF(2^4), normal basis [Z^4, Z]

UNITY16 = 0xF
NU = 0x1  # norm of GF(2^8)/GF(2^4); y^2 + y + NU irreducible over GF(2^4)


def _g16_mul_int(a: int, b: int) -> int:
    a1, a0 = (a >> 2) & 3, a & 3
    b1, b0 = (b >> 2) & 3, b & 3
    t = _g4_mul_int(a1 ^ a0, b1 ^ b0)
    nt = _g4_mul_int(N_SCALE, t)
    return ((nt ^ _g4_mul_int(a1, b1)) << 2) | (nt ^ _g4_mul_int(a0, b0))


G16_MUL = np.array([[_g16_mul_int(a, b) for b in range(16)] for a in range(16)], dtype=np.uint8)
G16_SQ = np.array([_g16_mul_int(a, a) for a in range(16)], dtype=np.uint8)
G16_SCALE_NU = G16_MUL[NU]
G16_SQ_SCALE_NU = G16_SCALE_NU[G16_SQ]

_inv16 = [0] * 16
for _a in range(1, 16):
    _inv16[_a] = next(_b for _b in range(16) if _g16_mul_int(_a, _b) == UNITY16)
G16_INV = np.array(_inv16, dtype=np.uint8)

# ---------------------------------------------------------------------------
# GF(2^8) in the tower basis

UNITY256 = 0xFF


def _g256_mul_int(a: int, b: int) -> int:
    a1, a0 = (a >> 4) & 15, a & 15
    b1, b0 = (b >> 4) & 15, b & 15
    t = _g16_mul_int(a1 ^ a0, b1 ^ b0)
    nt = _g16_mul_int(NU, t)
    return ((nt ^ _g16_mul_int(a1, b1)) << 4) | (nt ^ _g16_mul_int(a0, b0))


G256_MUL = np.array(
    [[_g256_mul_int(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8
)


def tower_mul(a, b):
    """Product of two GF(2^8) elements in tower basis (elementwise on arrays)."""
    return G256_MUL[a, b]


def gf4_mul(s, t):
    """GF(2^2) product in normal basis; the elementary non-linear gate."""
    return G4_MUL[s, t]


def gf16_mul(a, b):
    """GF(2^4) product in normal basis."""
    return G16_MUL[a, b]


def gf16_sq_scale_nu(a):
    """NU * a^2, the square-scale block feeding the GF(2^4) inverter."""
    return G16_SQ_SCALE_NU[a]


def gf16_inv(a):
    """GF(2^4) inverse (0 maps to 0)."""
    return G16_INV[a]


# ---------------------------------------------------------------------------
# Polynomial-basis oracle (FIPS-197 arithmetic, used only for verification)


def gf256_mul_poly(a: int, b: int) -> int:
    """Shift-and-reduce product in the AES polynomial basis x^8+x^4+x^3+x+1."""
    r = 0
    a &= 0xFF
    for _ in range(8):
        if b & 1:
            r ^= a
        hi = a & 0x80
        a = (a << 1) & 0xFF
        if hi:
            a ^= 0x1B
        b >>= 1
    return r


def gf256_inv_poly(v: int) -> int:
    """Inverse in the polynomial basis via v^254 (0 maps to 0)."""
    r, b, e = 1, v, 254
    while e:
        if e & 1:
            r = gf256_mul_poly(r, b)
        b = gf256_mul_poly(b, b)
        e >>= 1
    return 0 if v == 0 else r


# ---------------------------------------------------------------------------
# Basis change and the AES affine layer


@dataclass(frozen=True)
class BasisMatrix:
    """An 8x8 GF(2) matrix given by its column bytes, with its inverse."""

    cols: tuple
    inv_cols: tuple

    def apply(self, v):
        return _apply_cols(self.cols, v)

    def apply_inv(self, v):
        return _apply_cols(self.inv_cols, v)

    def as_bits(self) -> np.ndarray:
        return np.array([[(c >> r) & 1 for c in self.cols] for r in range(8)], dtype=np.uint8)

    def inv_as_bits(self) -> np.ndarray:
        return np.array([[(c >> r) & 1 for c in self.inv_cols] for r in range(8)], dtype=np.uint8)


def _apply_cols(cols, v):
    r = 0
    for i in range(8):
        r ^= ((v >> i) & 1) * cols[i]
    return r


# Column i is the tower image of the polynomial-basis byte 1<<i; the map sends
# the AES generator 0x02 to 0x17, the smallest tower root of x^8+x^4+x^3+x+1.
POLY_TO_TOWER = BasisMatrix(
    cols=(0xFF, 0x17, 0x9A, 0x74, 0x18, 0x51, 0x90, 0xF2),
    inv_cols=(0xCA, 0x93, 0x9C, 0xD7, 0xC7, 0x7E, 0x2D, 0x87),
)

TO_TOWER = np.array([_apply_cols(POLY_TO_TOWER.cols, v) for v in range(256)], dtype=np.uint8)
FROM_TOWER = np.array([_apply_cols(POLY_TO_TOWER.inv_cols, v) for v in range(256)], dtype=np.uint8)


def to_tower(v):
    return TO_TOWER[v]


def from_tower(v):
    return FROM_TOWER[v]


def derive_basis_matrices():
    """Recompute the basis-change matrices from scratch (test cross-check).

    Finds the smallest root of the AES polynomial in the tower field and
    builds the column table from its powers.
    """
    def poly_eval(c):
        def p(x, e):
            r, b = UNITY256, x
            while e:
                if e & 1:
                    r = _g256_mul_int(r, b)
                b = _g256_mul_int(b, b)
                e >>= 1
            return r

        return p(c, 8) ^ p(c, 4) ^ p(c, 3) ^ c ^ UNITY256

    beta = min(c for c in range(256) if poly_eval(c) == 0)
    cols, p = [], UNITY256
    for _ in range(8):
        cols.append(p)
        p = _g256_mul_int(p, beta)
    fwd = [_apply_cols(cols, v) for v in range(256)]
    inv = [0] * 256
    for v in range(256):
        inv[fwd[v]] = v
    inv_cols = [inv[1 << i] for i in range(8)]
    return BasisMatrix(cols=tuple(cols), inv_cols=tuple(inv_cols))


def _affine_int(v: int) -> int:
    r = 0x63
    for i in range(8):
        bit = (
            (v >> i) ^ (v >> ((i + 4) % 8)) ^ (v >> ((i + 5) % 8))
            ^ (v >> ((i + 6) % 8)) ^ (v >> ((i + 7) % 8))
        ) & 1
        r ^= bit << i
    return r


AFFINE = np.array([_affine_int(v) for v in range(256)], dtype=np.uint8)
AFFINE_LIN = np.array([_affine_int(v) ^ 0x63 for v in range(256)], dtype=np.uint8)
AFFINE_CONST = 0x63

# FIPS-197 S-box, the published reference table.  Tests re-derive it both from
# the polynomial-basis oracle and from the tower-basis inverter.
SBOX = np.array([
    0x63, 0x7C, 0x77, 0x7B, 0xF2, 0x6B, 0x6F, 0xC5, 0x30, 0x01, 0x67, 0x2B, 0xFE, 0xD7, 0xAB, 0x76,
    0xCA, 0x82, 0xC9, 0x7D, 0xFA, 0x59, 0x47, 0xF0, 0xAD, 0xD4, 0xA2, 0xAF, 0x9C, 0xA4, 0x72, 0xC0,
    0xB7, 0xFD, 0x93, 0x26, 0x36, 0x3F, 0xF7, 0xCC, 0x34, 0xA5, 0xE5, 0xF1, 0x71, 0xD8, 0x31, 0x15,
    0x04, 0xC7, 0x23, 0xC3, 0x18, 0x96, 0x05, 0x9A, 0x07, 0x12, 0x80, 0xE2, 0xEB, 0x27, 0xB2, 0x75,
    0x09, 0x83, 0x2C, 0x1A, 0x1B, 0x6E, 0x5A, 0xA0, 0x52, 0x3B, 0xD6, 0xB3, 0x29, 0xE3, 0x2F, 0x84,
    0x53, 0xD1, 0x00, 0xED, 0x20, 0xFC, 0xB1, 0x5B, 0x6A, 0xCB, 0xBE, 0x39, 0x4A, 0x4C, 0x58, 0xCF,
    0xD0, 0xEF, 0xAA, 0xFB, 0x43, 0x4D, 0x33, 0x85, 0x45, 0xF9, 0x02, 0x7F, 0x50, 0x3C, 0x9F, 0xA8,
    0x51, 0xA3, 0x40, 0x8F, 0x92, 0x9D, 0x38, 0xF5, 0xBC, 0xB6, 0xDA, 0x21, 0x10, 0xFF, 0xF3, 0xD2,
    0xCD, 0x0C, 0x13, 0xEC, 0x5F, 0x97, 0x44, 0x17, 0xC4, 0xA7, 0x7E, 0x3D, 0x64, 0x5D, 0x19, 0x73,
    0x60, 0x81, 0x4F, 0xDC, 0x22, 0x2A, 0x90, 0x88, 0x46, 0xEE, 0xB8, 0x14, 0xDE, 0x5E, 0x0B, 0xDB,
    0xE0, 0x32, 0x3A, 0x0A, 0x49, 0x06, 0x24, 0x5C, 0xC2, 0xD3, 0xAC, 0x62, 0x91, 0x95, 0xE4, 0x79,
    0xE7, 0xC8, 0x37, 0x6D, 0x8D, 0xD5, 0x4E, 0xA9, 0x6C, 0x56, 0xF4, 0xEA, 0x65, 0x7A, 0xAE, 0x08,
    0xBA, 0x78, 0x25, 0x2E, 0x1C, 0xA6, 0xB4, 0xC6, 0xE8, 0xDD, 0x74, 0x1F, 0x4B, 0xBD, 0x8B, 0x8A,
    0x70, 0x3E, 0xB5, 0x66, 0x48, 0x03, 0xF6, 0x0E, 0x61, 0x35, 0x57, 0xB9, 0x86, 0xC1, 0x1D, 0x9E,
    0xE1, 0xF8, 0x98, 0x11, 0x69, 0xD9, 0x8E, 0x94, 0x9B, 0x1E, 0x87, 0xE9, 0xCE, 0x55, 0x28, 0xDF,
    0x8C, 0xA1, 0x89, 0x0D, 0xBF, 0xE6, 0x42, 0x68, 0x41, 0x99, 0x2D, 0x0F, 0xB0, 0x54, 0xBB, 0x16,
], dtype=np.uint8)

INV_SBOX = np.zeros(256, dtype=np.uint8)
INV_SBOX[SBOX] = np.arange(256, dtype=np.uint8)

MUL2 = np.array([gf256_mul_poly(v, 2) for v in range(256)], dtype=np.uint8)
MUL3 = np.array([gf256_mul_poly(v, 3) for v in range(256)], dtype=np.uint8)
MUL9 = np.array([gf256_mul_poly(v, 9) for v in range(256)], dtype=np.uint8)
MUL11 = np.array([gf256_mul_poly(v, 11) for v in range(256)], dtype=np.uint8)
MUL13 = np.array([gf256_mul_poly(v, 13) for v in range(256)], dtype=np.uint8)
MUL14 = np.array([gf256_mul_poly(v, 14) for v in range(256)], dtype=np.uint8)

POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)

TOWER_INV = np.zeros(256, dtype=np.uint8)
for _x in range(1, 256):
    TOWER_INV[_x] = next(_y for _y in range(256) if _g256_mul_int(_x, _y) == UNITY256)


def hi_nib(v):
    return (v >> 4) & 0xF if isinstance(v, int) else (v >> 4) & np.uint8(0xF)


def lo_nib(v):
    return v & 0xF if isinstance(v, int) else v & np.uint8(0xF)


def nib_pair(hi, lo):
    if isinstance(hi, int) and isinstance(lo, int):
        return ((hi & 0xF) << 4) | (lo & 0xF)
    return ((hi & np.uint8(0xF)) << 4) | (lo & np.uint8(0xF))
