"""Embedded invariant suite run by ``patchwarp selfcheck``."""
from __future__ import annotations

import time
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import oracles
from .alignment import compute_alignment, inpaint_features
from .fixtures import make_tpose_fixture, random_quad_array
from .geometry import Quad, compose, estimate_homography, invert, map_points
from .metrics import total_loss
from .modulation import AffineParams, ConvParams, channel_stats, conv2d_same, spade_backward, spade_modulate
from .patching import TEMPLATE_QUAD, build_patch_layout, extract_and_normalize

CONV_FIXTURE = "selfcheck_conv.bin"


def default_conv_fixture() -> Path:
    return Path(str(resources.files("patchwarp") / "data" / CONV_FIXTURE))


def _homography(rng):
    worst = 0.0
    for _ in range(200):
        s = random_quad_array(rng, rng.uniform(0, 400, 2), rng.uniform(20, 150))
        d = random_quad_array(rng, rng.uniform(0, 400, 2), rng.uniform(20, 150))
        H = estimate_homography(Quad.from_array(s), Quad.from_array(d))
        worst = max(worst, np.abs(map_points(H, s) - d).max())
        back = map_points(compose(invert(H), H), s)
        worst = max(worst, np.abs(back - s).max())
    return worst < 1e-6, f"max residual {worst:.2e} px"


def _combined(rng):
    worst = 0.0
    for _ in range(100):
        s = Quad.from_array(random_quad_array(rng, (200, 200), 80))
        t = Quad.from_array(random_quad_array(rng, (200, 200), 80))
        h_sn = estimate_homography(s, TEMPLATE_QUAD)
        h_nt = estimate_homography(TEMPLATE_QUAD, t)
        a = s.as_array()
        worst = max(worst, np.abs(map_points(compose(h_nt, h_sn), a) - map_points(h_nt, map_points(h_sn, a))).max())
    return worst < 1e-6, f"max deviation {worst:.2e} px"


def _layout(rng):
    img, mask, pose = make_tpose_fixture(0, "solid")
    layout = build_patch_layout(pose, "upper")
    patches = extract_and_normalize(img, mask, layout)
    ok = len(layout) == 8 and all(p.pixels.shape == (64, 64, 4) for p in patches)
    return ok, f"{len(layout)} patches"


def _stats(rng):
    worst = 0.0
    for _ in range(10):
        h = rng.normal(2.0, 3.0, size=(3, 7, 5))
        mu, sd = channel_stats(h)
        omu, osd = oracles.oracle_channel_stats(h)
        worst = max(worst, np.abs(mu - omu).max(), np.abs(sd - osd).max())
        x = rng.normal(size=(8, 16, 16)).astype(np.float32)
        out = spade_modulate(x, AffineParams(np.ones_like(x), np.zeros_like(x)), eps=0.0)
        m2, s2 = channel_stats(out)
        if np.abs(m2).max() >= 1e-5 or np.abs(s2 - 1).max() >= 1e-4:
            return False, "normalised output is not zero-mean unit-variance"
    return worst < 1e-6, f"max oracle deviation {worst:.2e}"


def _gradient(rng):
    worst = 0.0
    for _ in range(10):
        h, g, b, up = (rng.normal(size=(2, 4, 4)) for _ in range(4))
        gh, gg, gb = spade_backward(h, AffineParams(g, b), 1e-5, up)
        fh = oracles.central_difference(lambda x: float((up * spade_modulate(x, AffineParams(g, b), 1e-5)).sum()), h)
        fg = oracles.central_difference(lambda x: float((up * spade_modulate(h, AffineParams(x, b), 1e-5)).sum()), g)
        fb = oracles.central_difference(lambda x: float((up * spade_modulate(h, AffineParams(g, x), 1e-5)).sum()), b)
        for a, n in ((gh, fh), (gg, fg), (gb, fb)):
            worst = max(worst, relative_error(a, n))
    return worst < 1e-3, f"max relative error {worst:.2e}"


def _conv(rng, fixture: Optional[Path]):
    path = fixture or default_conv_fixture()
    try:
        params = ConvParams.load(path)
    except (OSError, ValueError) as exc:
        return False, f"conv fixture {path}: {exc}"
    x = rng.normal(size=(params.in_channels, 6, 5)).astype(np.float32)
    dev = np.abs(conv2d_same(x, params) - oracles.oracle_conv2d(x, params.weight, params.bias)).max()
    return dev < 1e-5, f"max oracle deviation {dev:.2e}"


def _masks(rng):
    for _ in range(200):
        mg = rng.random((16, 16)) < 0.5
        mt = rng.random((16, 16)) < 0.5
        m = compute_alignment(mg, mt)
        if (m.aligned & m.misaligned).any() or not np.array_equal(m.aligned | m.misaligned, mg):
            return False, "partition violated"
        if not m.aligned.any():
            continue
        f = rng.normal(size=(3, 16, 16)).astype(np.float32)
        dev = np.abs(inpaint_features(f, m) - oracles.oracle_inpaint(f, m.aligned, m.misaligned)).max()
        if dev >= 1e-5:
            return False, f"inpainting deviates from oracle by {dev:.2e}"
    return True, "partition exact, inpainting matches oracle"


def _losses(rng):
    v = total_loss({"gan": 0.0, "rec": 1.0, "perc": 1.0, "mask": 1.0})
    return v == 180.0, f"total_loss(0,1,1,1) = {v:g}"


def relative_error(a, n, floor: float = 1e-6) -> float:
    """Largest elementwise ``|a - n| / max(|a|, |n|, floor)``."""
    a = np.asarray(a, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return float((np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)).max())


def run_checks(conv_fixture: Optional[Path] = None, seed: int = 0) -> list[tuple[str, bool, str, float]]:
    """Run every check; returns ``(name, passed, detail, seconds)`` rows."""
    checks: list[tuple[str, Callable]] = [
        ("homography round-trip", _homography),
        ("combined matrix", _combined),
        ("layout cardinality", _layout),
        ("channel statistics", _stats),
        ("modulation gradient", _gradient),
        ("conv fixture", lambda rng: _conv(rng, conv_fixture)),
        ("mask algebra / inpainting", _masks),
        ("loss constants", _losses),
    ]
    rows = []
    for name, fn in checks:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, bool(ok), detail, time.perf_counter() - t0))
    return rows


def format_table(rows) -> str:
    width = max(len(r[0]) for r in rows)
    lines = [f"{'check'.ljust(width)}  result  time     detail"]
    for name, ok, detail, secs in rows:
        lines.append(f"{name.ljust(width)}  {'PASS' if ok else 'FAIL'}    {secs:6.2f}s  {detail}")
    return "\n".join(lines)
