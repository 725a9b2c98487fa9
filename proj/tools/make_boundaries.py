#!/usr/bin/env python3
"""Writes the bundled boundary sample files data/case2_samples.txt and
data/case3_samples.txt. Deterministic: rerunning reproduces the files."""

import argparse
import pathlib

import numpy as np

CASE2_CENTER = np.array([50.0, 45.0])
# r(θ) = c0 + Σ_h (c_{2h-1} cos hθ + c_{2h} sin hθ), harmonics 1..4, plus two
# small high-frequency terms for irregularity.
CASE2_COEFFS = [34.001, 0.978, 6.516, 0.479, 3.105, 3.902, 3.121, -1.167, -1.532]
CASE2_WIGGLE = [(6, 0.9, 0.4), (7, 0.6, 1.9)]  # (harmonic, amplitude, phase)
CASE2_N = 300
CASE2_NOISE = 0.3
CASE2_SEED = 2

# Case 3: thick annular arc around the origin, open to the right, with rounded
# ends. Split by y = 0 into two star-shaped halves.
CASE3_R_IN = 4.5
CASE3_R_OUT = 9.0
CASE3_PHI0 = np.pi / 2  # arc runs from 90° to 270°
CASE3_PHI1 = 3 * np.pi / 2
CASE3_SPACING = 0.2  # m between samples


def case2_radius(theta):
    c = CASE2_COEFFS
    r = c[0] + sum(c[2 * h - 1] * np.cos(h * theta) + c[2 * h] * np.sin(h * theta)
                   for h in range(1, 5))
    for h, amp, phase in CASE2_WIGGLE:
        r = r + amp * np.cos(h * theta + phase)
    return r


def case2_samples():
    rng = np.random.default_rng(CASE2_SEED)
    theta = 2 * np.pi * np.arange(CASE2_N) / CASE2_N
    r = case2_radius(theta)
    pts = CASE2_CENTER + np.column_stack([np.cos(theta), np.sin(theta)]) * r[:, None]
    return pts + rng.normal(0.0, CASE2_NOISE, pts.shape)


def arc(center, radius, a0, a1, spacing):
    n = max(2, int(np.ceil(abs(a1 - a0) * radius / spacing)))
    a = np.linspace(a0, a1, n, endpoint=False)
    return np.asarray(center) + radius * np.column_stack([np.cos(a), np.sin(a)])


def case3_samples():
    mid = 0.5 * (CASE3_R_IN + CASE3_R_OUT)
    cap_r = 0.5 * (CASE3_R_OUT - CASE3_R_IN)
    top = mid * np.array([np.cos(CASE3_PHI0), np.sin(CASE3_PHI0)])
    bottom = mid * np.array([np.cos(CASE3_PHI1), np.sin(CASE3_PHI1)])
    # Counter-clockwise traversal of the closed outline.
    parts = [
        arc((0, 0), CASE3_R_OUT, CASE3_PHI0, CASE3_PHI1, CASE3_SPACING),
        arc(bottom, cap_r, CASE3_PHI1, CASE3_PHI1 + np.pi, CASE3_SPACING),
        arc((0, 0), CASE3_R_IN, CASE3_PHI1, CASE3_PHI0, CASE3_SPACING),
        arc(top, cap_r, CASE3_PHI0 - np.pi, CASE3_PHI0, CASE3_SPACING),
    ]
    return np.vstack(parts)


def winding_is_monotone(outline, s):
    """True if the polar angle about s increases strictly along the ordered
    outline, i.e. every ray from s meets it at most once."""
    d = np.diff(np.unwrap(np.arctan2(outline[:, 1] - s[1], outline[:, 0] - s[0])))
    return bool(np.all(d > 0))


def inside_case3(p):
    r = np.hypot(p[0], p[1])
    phi = np.mod(np.arctan2(p[1], p[0]), 2 * np.pi)
    if CASE3_R_IN < r < CASE3_R_OUT and CASE3_PHI0 <= phi <= CASE3_PHI1:
        return True
    mid = 0.5 * (CASE3_R_IN + CASE3_R_OUT)
    cap_r = 0.5 * (CASE3_R_OUT - CASE3_R_IN)
    for a in (CASE3_PHI0, CASE3_PHI1):
        if np.hypot(p[0] - mid * np.cos(a), p[1] - mid * np.sin(a)) < cap_r:
            return True
    return False


def check_case3(pts):
    dense = np.vstack([pts, pts[:1]])
    # No point of the set sees the whole outline.
    for x in np.arange(-9.0, 9.0, 0.1):
        for y in np.arange(-9.0, 9.0, 0.1):
            if inside_case3((x, y)) and winding_is_monotone(dense, (x, y)):
                raise SystemExit(f"case 3 outline is star-shaped about ({x:.1f}, {y:.1f})")
    for sign, ref in ((1, (-4.77, 4.77)), (-1, (-4.77, -4.77))):
        keep = sign * pts[:, 1] >= 0
        # Rotate so the half is one contiguous run in traversal order.
        start = int(np.argmin(keep)) if sign > 0 else 0
        order = np.roll(np.arange(len(pts)), -start)
        half = pts[order][keep[order]]
        if not winding_is_monotone(half, ref):
            raise SystemExit("case 3 half outline is not star-shaped about its reference")


def write(path, pts, header):
    with open(path, "w") as f:
        for line in header:
            f.write(f"# {line}\n")
        for x, y in pts:
            f.write(f"{x:.6f} {y:.6f}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    write(out / "case2_samples.txt", case2_samples(),
          ["irregular star-shaped boundary about (50, 45), noisy samples",
           f"N={CASE2_N} noise_std={CASE2_NOISE} seed={CASE2_SEED}", "x y (m)"])
    pts3 = case3_samples()
    check_case3(pts3)
    write(out / "case3_samples.txt", pts3,
          ["non-star-shaped arc with rounded ends, open to the right",
           f"r_in={CASE3_R_IN} r_out={CASE3_R_OUT} spacing={CASE3_SPACING}", "x y (m)"])


if __name__ == "__main__":
    main()
