"""The four S-box datapath models, staged and node-addressable.

Models: ``unprotected`` (single share), ``ti`` (3-share threshold masking),
``rsmask`` (3-state-share scheme with a mask share R routed through its own
single-share inverter and a randomized mapping of the output multipliers),
``infective`` (rsmask plus error recomputation and column infection).

All models share the composite-field inverter skeleton

    w = NU*(x0^x1)^2 + x0*x1,  y = w^-1 in GF(2^4),  out = (x0*y, x1*y)

and the same node-id scheme, so the same FaultSpec applies to any model.
Pipeline stages (register levels) per model:

    unprotected/ti:  s1 in, s2 norm, s3 delta, s4 y, s5 outputs, s6 transform
    rsmask:          s1 in | s2..s4 zero-flag tree, mask-share inverter and
                     mapping products | s5 mapped input | s6 norm | s7 delta |
                     s8 y | s9 output multipliers | s10 transform
    infective:       rsmask plus recomputation multipliers at s9, error at
                     s10, infected output transform at s11

The randomized mapping computes its correction terms from the stage-1 input
share registers, never from the main path's norm node, and the zero branch
adds fbar*(mask-share inverse) at the inverter input.  With R = r1||r0 the
high-nibble bracket takes r1; exhaustively this is the assignment that makes
the pre-transform output equal X^-1 ^ R for all 65536 (X, R) pairs.
"""

from __future__ import annotations

import numpy as np

from .gf import (
    AFFINE,
    AFFINE_CONST,
    AFFINE_LIN,
    FROM_TOWER,
    G4_MUL,
    G4_SCALE_N,
    G4_SQ,
    G16_INV,
    G16_MUL,
    G16_SQ,
    G16_SQ_SCALE_NU,
    G16_SCALE_NU,
    TO_TOWER,
    hi_nib,
    lo_nib,
    nib_pair,
)
from .masking import (
    masked_and_bits,
    masked_gf16_mul,
    masked_mul,
    masked_mul_single_share,
    remask,
    reshare_2to3,
    zero_sum,
)
from .nodes import DOMAIN_AUX, DOMAIN_DATA, DOMAIN_RS, Tap

MODELS = ("unprotected", "ti", "rsmask", "infective")

STAGES = {"unprotected": 6, "ti": 6, "rsmask": 10, "infective": 11}


def _mul1(a, b, tap: Tap, prefix: str, stage: int, domain=DOMAIN_DATA):
    """Single-share GF(2^4) multiplier with nameable GF(2^2) internals."""
    if tap.wants(prefix):
        a1, a0 = (a >> 2) & np.uint8(3), a & np.uint8(3)
        b1, b0 = (b >> 2) & np.uint8(3), b & np.uint8(3)
        qhh = tap.val(prefix + ".qhh", G4_MUL[a1, b1], stage, width=2, domain=domain)
        qll = tap.val(prefix + ".qll", G4_MUL[a0, b0], stage, width=2, domain=domain)
        qx = tap.val(prefix + ".qx", G4_MUL[a1 ^ a0, b1 ^ b0], stage, width=2, domain=domain)
        nt = G4_SCALE_N[qx]
        out = ((nt ^ qhh) << 2) | (nt ^ qll)
    else:
        out = G16_MUL[a, b]
    return tap.val(prefix + ".out", out, stage, width=4, domain=domain)


def _halves(v):
    return (v >> 2) & np.uint8(3), v & np.uint8(3)


# ---------------------------------------------------------------------------
# unprotected


def sbox_unprotected(x, tap: Tap):
    """FIPS S-box through the tower inverter, single share, all nodes live."""
    xt = tap.reg("pipe.s1.x.s0", TO_TOWER[np.asarray(x, dtype=np.uint8)], 1)
    x1, x0 = hi_nib(xt), lo_nib(xt)

    w = G16_SQ_SCALE_NU[x0 ^ x1] ^ _mul1(x0, x1, tap, "inv.norm.mul.m00", 2)
    w = tap.reg("pipe.s2.w.s0", w, 2, width=4)

    g1, g0 = _halves(w)
    p = tap.val("inv.inv16.pm.m00.out", G4_MUL[g1, g0], 3, width=2)
    delta = G4_SQ[G4_SCALE_N[G4_SQ[g1 ^ g0]] ^ p]
    delta = tap.reg("pipe.s3.delta.s0", delta, 3, width=2)

    yh = tap.val("inv.inv16.mul_hi.m00.out", G4_MUL[delta, g0], 4, width=2)
    yl = tap.val("inv.inv16.mul_lo.m00.out", G4_MUL[delta, g1], 4, width=2)
    y = tap.reg("pipe.s4.y.s0", (yh << 2) | yl, 4, width=4)

    l_hi = tap.val("inv.mul_hi.op_l.s0", x0, 5, width=4)
    y_hi = tap.val("inv.mul_hi.op_y.s0", y, 5, width=4)
    z1 = tap.reg("pipe.s5.z1.s0", _mul1(l_hi, y_hi, tap, "inv.mul_hi.m00", 5), 5, width=4)
    l_lo = tap.val("inv.mul_lo.op_l.s0", x1, 5, width=4)
    y_lo = tap.val("inv.mul_lo.op_y.s0", y, 5, width=4)
    z0 = tap.reg("pipe.s5.z0.s0", _mul1(l_lo, y_lo, tap, "inv.mul_lo.m00", 5), 5, width=4)

    out = AFFINE[FROM_TOWER[nib_pair(z1, z0)]]
    return tap.reg("out.s6.d0", out, 6)


# ---------------------------------------------------------------------------
# shared masked blocks


def _masked_norm(xt0_sh, xt1_sh, feed, tap, stage):
    """w = NU*(x0^x1)^2 + x0*x1 on 3 shares; returns registered w shares."""
    sq = [
        tap.val(f"inv.norm.sq.s{i}", G16_SQ_SCALE_NU[xt0_sh[i] ^ xt1_sh[i]], stage, width=4)
        for i in range(3)
    ]
    t_sh = masked_gf16_mul(xt0_sh, xt1_sh, feed, tap, "inv.norm.mul", stage)
    return [
        tap.reg(f"pipe.s{stage}.w.s{i}", t ^ s, stage, width=4)
        for i, (t, s) in enumerate(zip(t_sh, sq))
    ]


def _masked_gf16_inverse(w_sh, feed, tap, stage_a, stage_b):
    """Structural GF(2^4) inversion on 3 shares; returns registered y shares."""
    g1 = [(w >> 2) & np.uint8(3) for w in w_sh]
    g0 = [w & np.uint8(3) for w in w_sh]
    p_sh = masked_mul(g1, g0, feed, tap, "inv.inv16.pm", stage_a, width=2)
    delta = [
        tap.reg(
            f"pipe.s{stage_a}.delta.s{i}",
            G4_SQ[G4_SCALE_N[G4_SQ[g1[i] ^ g0[i]]] ^ p],
            stage_a,
            width=2,
        )
        for i, p in enumerate(p_sh)
    ]
    yh = masked_mul(delta, g0, feed, tap, "inv.inv16.mul_hi", stage_b, width=2)
    yl = masked_mul(delta, g1, feed, tap, "inv.inv16.mul_lo", stage_b, width=2)
    return [
        tap.reg(f"pipe.s{stage_b}.y.s{i}", (h << 2) | l, stage_b, width=4)
        for i, (h, l) in enumerate(zip(yh, yl))
    ]


def _final_muls(l_hi_sh, l_lo_sh, y_sh, feed, tap, stage):
    """Output multipliers with per-consumer operand routes."""
    lh = [tap.val(f"inv.mul_hi.op_l.s{i}", v, stage, width=4) for i, v in enumerate(l_hi_sh)]
    yh = [tap.val(f"inv.mul_hi.op_y.s{i}", v, stage, width=4) for i, v in enumerate(y_sh)]
    z1 = masked_gf16_mul(lh, yh, feed, tap, "inv.mul_hi", stage)
    z1 = [tap.reg(f"pipe.s{stage}.z1.s{i}", v, stage, width=4) for i, v in enumerate(z1)]
    ll = [tap.val(f"inv.mul_lo.op_l.s{i}", v, stage, width=4) for i, v in enumerate(l_lo_sh)]
    yl = [tap.val(f"inv.mul_lo.op_y.s{i}", v, stage, width=4) for i, v in enumerate(y_sh)]
    z0 = masked_gf16_mul(ll, yl, feed, tap, "inv.mul_lo", stage)
    z0 = [tap.reg(f"pipe.s{stage}.z0.s{i}", v, stage, width=4) for i, v in enumerate(z0)]
    return z1, z0


# ---------------------------------------------------------------------------
# ti


def sbox_ti(x_sh, feed, tap: Tap):
    """3-share TI S-box; combine(out) = SBOX[combine(x)]."""
    xs = [
        tap.reg(f"pipe.s1.x.s{i}", TO_TOWER[np.asarray(s, dtype=np.uint8)], 1)
        for i, s in enumerate(x_sh)
    ]
    x1 = [hi_nib(s) for s in xs]
    x0 = [lo_nib(s) for s in xs]

    w_sh = _masked_norm(x0, x1, feed, tap, 2)
    y_sh = _masked_gf16_inverse(w_sh, feed, tap, 3, 4)
    z1, z0 = _final_muls(x0, x1, y_sh, feed, tap, 5)

    out = []
    for i in range(3):
        o = AFFINE_LIN[FROM_TOWER[nib_pair(z1[i], z0[i])]]
        if i == 0:
            o = o ^ np.uint8(AFFINE_CONST)
        out.append(tap.reg(f"out.s6.d{i}", o, 6))
    return out


# ---------------------------------------------------------------------------
# rsmask


def compute_f(x_sh, feed, tap: Tap):
    """Shared zero flag: f combines to 0xF for X != 0 and to 0 for X == 0.

    Masked AND tree over the complemented bits of the shared input byte;
    every gate output is remasked and registered.
    """
    layer = []
    for j in range(8):
        bits = [(s >> np.uint8(j)) & np.uint8(1) for s in x_sh]
        bits[0] = bits[0] ^ np.uint8(1)
        layer.append(bits)
    for lvl, stage in ((1, 2), (2, 3), (3, 4)):
        nxt = []
        for k in range(len(layer) // 2):
            g = masked_and_bits(
                layer[2 * k], layer[2 * k + 1], feed, tap, f"f.l{lvl}.g{k}", stage
            )
            g = [
                tap.reg(f"f.s{stage}.l{lvl}g{k}.s{i}", b, stage, width=1, domain=DOMAIN_AUX)
                for i, b in enumerate(g)
            ]
            nxt.append(g)
        layer = nxt
    z = layer[0]
    f_sh = []
    for i in range(3):
        b = z[i] ^ np.uint8(1) if i == 0 else z[i]
        f_sh.append(
            tap.reg(f"f.s4.f.s{i}", b * np.uint8(0xF), 4, width=4, domain=DOMAIN_AUX)
        )
    return f_sh


def _rs_mask_path(r_t, tap: Tap):
    """Single-share inverter for the mask share R (tower basis)."""
    r1, r0 = hi_nib(r_t), lo_nib(r_t)
    norm = G16_SQ_SCALE_NU[r1 ^ r0] ^ _mul1(r1, r0, tap, "rpath.norm.mul", 2, DOMAIN_RS)
    norm = tap.reg("rpath.s2.norm", norm, 2, width=4, domain=DOMAIN_RS)
    g1, g0 = _halves(norm)
    p = tap.val("rpath.inv16.pm.out", G4_MUL[g1, g0], 3, width=2, domain=DOMAIN_RS)
    delta = G4_SQ[G4_SCALE_N[G4_SQ[g1 ^ g0]] ^ p]
    delta = tap.reg("rpath.s3.delta", delta, 3, width=2, domain=DOMAIN_RS)
    ry = tap.reg("rpath.s3.y", (G4_MUL[delta, g0] << 2) | G4_MUL[delta, g1], 3, width=4,
                 domain=DOMAIN_RS)
    rinv_hi = _mul1(r0, ry, tap, "rpath.mul_hi", 4, DOMAIN_RS)
    rinv_lo = _mul1(r1, ry, tap, "rpath.mul_lo", 4, DOMAIN_RS)
    rinv_hi = tap.reg("rpath.s4.rinv_hi", rinv_hi, 4, width=4, domain=DOMAIN_RS)
    rinv_lo = tap.reg("rpath.s4.rinv_lo", rinv_lo, 4, width=4, domain=DOMAIN_RS)
    return r1, r0, rinv_hi, rinv_lo


def rs_forward_map(d0, d1, rs, feed, tap: Tap):
    """Randomized mapping of the inverter: pre-transform output shares.

    Input is the 3-share state byte (two data shares and the mask share,
    polynomial basis).  Returns ((z1 shares, z0 shares), (r1, r0), aux)
    where combine(z1)||combine(z0) = X^-1 ^ (r1||r0) in the tower basis,
    X being the unmasked state byte mapped to the tower.
    """
    t0 = TO_TOWER[np.asarray(d0, dtype=np.uint8)]
    t1 = TO_TOWER[np.asarray(d1, dtype=np.uint8)]
    r_t = tap.reg("pipe.s1.r", TO_TOWER[np.asarray(rs, dtype=np.uint8)], 1, domain=DOMAIN_RS)

    xs_wire = reshare_2to3([t0 ^ r_t, t1], feed)
    xs = [tap.reg(f"pipe.s1.x.s{i}", s, 1) for i, s in enumerate(xs_wire)]
    x1 = [hi_nib(s) for s in xs]
    x0 = [lo_nib(s) for s in xs]

    f_sh = compute_f(xs, feed, tap)
    r1, r0, rinv_hi, rinv_lo = _rs_mask_path(r_t, tap)

    # mapping correction terms, recomputed from the stage-1 input shares
    sq = [
        tap.reg(f"map.s2.sq.s{i}", G16_SQ[x0[i] ^ x1[i]], 2, width=4) for i in range(3)
    ]
    nur_hi = tap.reg("map.s2.nur_hi", G16_SCALE_NU[r1], 2, width=4, domain=DOMAIN_RS)
    nur_lo = tap.reg("map.s2.nur_lo", G16_SCALE_NU[r0], 2, width=4, domain=DOMAIN_RS)

    ta_hi = masked_mul_single_share(sq, nur_hi, tap, "map.ta_hi", 3)
    ta_hi = [tap.reg(f"map.s3.ta_hi.s{i}", v, 3, width=4) for i, v in enumerate(ta_hi)]
    ta_lo = masked_mul_single_share(sq, nur_lo, tap, "map.ta_lo", 3)
    ta_lo = [tap.reg(f"map.s3.ta_lo.s{i}", v, 3, width=4) for i, v in enumerate(ta_lo)]

    xr_hi = masked_mul_single_share(x0, r1, tap, "map.xr_hi", 3)
    xr_hi = [tap.reg(f"map.s3.xr_hi.s{i}", v, 3, width=4) for i, v in enumerate(xr_hi)]
    xr_lo = masked_mul_single_share(x1, r0, tap, "map.xr_lo", 3)
    xr_lo = [tap.reg(f"map.s3.xr_lo.s{i}", v, 3, width=4) for i, v in enumerate(xr_lo)]

    tb_hi = masked_gf16_mul(xr_hi, x1, feed, tap, "map.tb_hi", 4)
    tb_hi = [tap.reg(f"map.s4.tb_hi.s{i}", v, 4, width=4) for i, v in enumerate(tb_hi)]
    tb_lo = masked_gf16_mul(xr_lo, x0, feed, tap, "map.tb_lo", 4)
    tb_lo = [tap.reg(f"map.s4.tb_lo.s{i}", v, 4, width=4) for i, v in enumerate(tb_lo)]

    tc_hi = masked_gf16_mul(tb_hi, f_sh, feed, tap, "map.tc_hi", 5)
    tc_hi = [tap.reg(f"map.s5.tc_hi.s{i}", v, 5, width=4) for i, v in enumerate(tc_hi)]
    tc_lo = masked_gf16_mul(tb_lo, f_sh, feed, tap, "map.tc_lo", 5)
    tc_lo = [tap.reg(f"map.s5.tc_lo.s{i}", v, 5, width=4) for i, v in enumerate(tc_lo)]

    # zero branch: add fbar * R^-1 at the inverter input
    fbar = [s ^ np.uint8(0xF) if i == 0 else s for i, s in enumerate(f_sh)]
    fb_hi = masked_mul_single_share(fbar, rinv_hi, tap, "map.fbr_hi", 5)
    fb_lo = masked_mul_single_share(fbar, rinv_lo, tap, "map.fbr_lo", 5)
    xt1 = [
        tap.reg(f"pipe.s5.xt1.s{i}", x1[i] ^ fb_hi[i], 5, width=4) for i in range(3)
    ]
    xt0 = [
        tap.reg(f"pipe.s5.xt0.s{i}", x0[i] ^ fb_lo[i], 5, width=4) for i in range(3)
    ]

    w_sh = _masked_norm(xt0, xt1, feed, tap, 6)
    y_sh = _masked_gf16_inverse(w_sh, feed, tap, 7, 8)

    l_hi = [xt0[i] ^ ta_hi[i] ^ tc_hi[i] for i in range(3)]
    l_lo = [xt1[i] ^ ta_lo[i] ^ tc_lo[i] for i in range(3)]
    z1, z0 = _final_muls(l_hi, l_lo, y_sh, feed, tap, 9)

    aux = {
        "r_t": r_t, "x0": x0, "x1": x1, "xt0": xt0, "xt1": xt1, "y": y_sh,
        "x_wire": xs_wire,
    }
    return (z1, z0), (r1, r0), aux


def _output_transform(z1, z0, rs_poly, tap: Tap, stage: int):
    """Inverse basis change + affine per share, 3->2 share compression."""
    out = []
    for i in range(3):
        o = AFFINE_LIN[FROM_TOWER[nib_pair(z1[i], z0[i])]]
        if i == 0:
            o = o ^ np.uint8(AFFINE_CONST)
        out.append(o)
    o0 = tap.reg(f"out.s{stage}.d0", out[0] ^ out[2], stage)
    o1 = tap.reg(f"out.s{stage}.d1", out[1], stage)
    rs_out = tap.reg(
        f"out.s{stage}.rs", AFFINE_LIN[np.asarray(rs_poly, dtype=np.uint8)], stage,
        domain=DOMAIN_RS,
    )
    return o0, o1, rs_out


def sbox_rsmask(d0, d1, rs, feed, tap: Tap):
    """RS-masked S-box on one state byte.

    Returns (d0', d1', rs') with d0' ^ d1' ^ rs' = SBOX[d0 ^ d1 ^ rs]; the
    output mask share is the affine-linear image of the input mask share.
    """
    (z1, z0), _, _ = rs_forward_map(d0, d1, rs, feed, tap)
    return _output_transform(z1, z0, rs, tap, 10)


def sbox_infective(d0, d1, rs, feed, tap: Tap):
    """RS-masked S-box plus error recomputation.

    Returns (d0', d1', rs', e_sh): e_sh are byte shares (tower basis) that
    combine to 0 exactly when the mapped output is consistent with the
    recomputed inverse; the caller applies the column infection.
    """
    (z1, z0), _, aux = rs_forward_map(d0, d1, rs, feed, tap)

    # The redundancy block registers its own copies of the input shares, so
    # corruption of the main input registers shows up as a nonzero error.
    # For a zero input the recomputed inverse is 0 while the mapped path
    # gives the mask share back, and the two cancel against R.
    red_x = [tap.reg(f"red.s1.x.s{i}", v, 1) for i, v in enumerate(aux["x_wire"])]
    rx0 = [lo_nib(v) for v in red_x]
    rx1 = [hi_nib(v) for v in red_x]
    lh = [tap.val(f"red.mul_hi.op_l.s{i}", v, 9, width=4) for i, v in enumerate(rx0)]
    yh = [tap.val(f"red.mul_hi.op_y.s{i}", v, 9, width=4) for i, v in enumerate(aux["y"])]
    zc1 = masked_gf16_mul(lh, yh, feed, tap, "red.mul_hi", 9)
    zc1 = [tap.reg(f"red.s9.zc1.s{i}", v, 9, width=4) for i, v in enumerate(zc1)]
    ll = [tap.val(f"red.mul_lo.op_l.s{i}", v, 9, width=4) for i, v in enumerate(rx1)]
    yl = [tap.val(f"red.mul_lo.op_y.s{i}", v, 9, width=4) for i, v in enumerate(aux["y"])]
    zc0 = masked_gf16_mul(ll, yl, feed, tap, "red.mul_lo", 9)
    zc0 = [tap.reg(f"red.s9.zc0.s{i}", v, 9, width=4) for i, v in enumerate(zc0)]

    e_sh = []
    for i in range(3):
        e = nib_pair(z1[i], z0[i]) ^ nib_pair(zc1[i], zc0[i])
        if i == 0:
            e = e ^ aux["r_t"]
        e_sh.append(tap.reg(f"inf.s10.e.s{i}", e, 10))

    zp1 = [tap.reg(f"inf.s10.z1.s{i}", v, 10, width=4) for i, v in enumerate(z1)]
    zp0 = [tap.reg(f"inf.s10.z0.s{i}", v, 10, width=4) for i, v in enumerate(z0)]
    return (zp1, zp0), e_sh, aux["r_t"]


def infective_output(z1, z0, e_col_sh, infect_mask, rs_poly, tap: Tap):
    """Apply E_col * R_i (tower product, per share) and transform out."""
    from .gf import G256_MUL

    zb = [nib_pair(z1[i], z0[i]) for i in range(3)]
    infected = [zb[i] ^ G256_MUL[e_col_sh[i], infect_mask] for i in range(3)]
    iz1 = [hi_nib(v) for v in infected]
    iz0 = [lo_nib(v) for v in infected]
    return _output_transform(iz1, iz0, rs_poly, tap, 11)


# ---------------------------------------------------------------------------
# catalog dry runs


def catalog_dry_run(model: str):
    """Evaluation closure used to enumerate a model's nodes."""
    from .rng import Rng, MASKS

    def run(tap):
        feed = Rng(0).spawn(MASKS)
        x = np.zeros(2, dtype=np.uint8)
        if model == "unprotected":
            sbox_unprotected(x, tap)
        elif model == "ti":
            sbox_ti([x, x, x], feed, tap)
        elif model == "rsmask":
            sbox_rsmask(x, x, x, feed, tap)
        elif model == "infective":
            (z1, z0), e_sh, r_t = sbox_infective(x, x, x, feed, tap)
            infective_output(z1, z0, e_sh, np.zeros(2, dtype=np.uint8), x, tap)
        else:
            raise ValueError(f"unknown model {model!r}")

    return run


_CATALOGS: dict = {}


def catalog(model: str):
    from .nodes import build_catalog

    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    if model not in _CATALOGS:
        _CATALOGS[model] = build_catalog(model, catalog_dry_run(model))
    return _CATALOGS[model]
