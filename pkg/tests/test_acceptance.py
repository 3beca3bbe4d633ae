"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``.
"""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from patchwarp.alignment import compute_alignment, inpaint_features
from patchwarp.augmentation import EraseConfig, plan_erase, random_erase
from patchwarp.cli import main
from patchwarp.fixtures import (
    make_texture,
    make_tpose_fixture,
    random_conv_params,
    random_quad_array,
    rgba,
    write_bundle,
)
from patchwarp.geometry import Quad, compose, estimate_homography, map_points
from patchwarp.metrics import LossWeights, total_loss
from patchwarp.modulation import AffineParams, channel_stats, conv2d_same, spade_backward, spade_modulate
from patchwarp.oracles import central_difference, oracle_conv2d, oracle_inpaint, oracle_modulate
from patchwarp.patching import (
    TEMPLATE_QUAD,
    build_patch_layout,
    extract_and_normalize,
    normalize_patch,
    quad_union_mask,
    render_patch,
    warp_garment,
)
from patchwarp.roles import UPPER_ROLES
from patchwarp.selfcheck import relative_error, run_checks

pytestmark = pytest.mark.acceptance

MODULE_START = time.perf_counter()
REPO = Path(__file__).resolve().parents[1]


def random_pairs(seed, n, lo=5.0, hi=300.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        s = random_quad_array(rng, rng.uniform(-200, 600, 2), rng.uniform(lo, hi))
        d = random_quad_array(rng, rng.uniform(-200, 600, 2), rng.uniform(lo, hi))
        out.append((Quad.from_array(s), Quad.from_array(d)))
    return out


def test_01_homography_exactness(report):
    pairs = random_pairs(101, 1000)
    t0 = time.perf_counter()
    hs = [estimate_homography(s, d) for s, d in pairs]
    elapsed = time.perf_counter() - t0
    worst = max(np.abs(map_points(h, s.as_array()) - d.as_array()).max() for h, (s, d) in zip(hs, pairs))
    ok = worst < 1e-6 and elapsed < 1.0
    report(1, "homography exactness", ok, f"max residual {worst:.2e} px (< 1e-6), 1000 solves in {elapsed:.3f} s (< 1 s)")
    assert ok


def test_02_combined_matrix(report):
    worst = 0.0
    for s, t in random_pairs(102, 200, 20, 200):
        h_sn = estimate_homography(s, TEMPLATE_QUAD)
        h_nt = estimate_homography(TEMPLATE_QUAD, t)
        a = s.as_array()
        one = map_points(compose(h_nt, h_sn), a)
        two = map_points(h_nt, map_points(h_sn, a))
        worst = max(worst, np.abs(one - two).max(), np.abs(one - t.as_array()).max())
    ok = worst < 1e-6
    report(2, "combined-matrix equivalence", ok, f"max deviation {worst:.2e} px over 200 triples (< 1e-6)")
    assert ok


def test_03_layout_cardinality(report):
    img, mask, pose = make_tpose_fixture(0)
    layout = build_patch_layout(pose, "upper")
    patches = extract_and_normalize(img, mask, layout)
    shapes = {p.pixels.shape for p in patches} | {p.validity.shape + (4,) for p in patches}
    ok = len(layout) == 8 and layout.roles == UPPER_ROLES and shapes == {(64, 64, 4)}
    report(3, "layout cardinality", ok, f"{len(layout)} patches, roles {[r.value for r in layout.roles]}, shapes {sorted(shapes)}")
    assert ok


def test_04_round_trip_fidelity(report):
    rng = np.random.default_rng(104)
    hw = (200, 200)
    full = np.ones(hw, bool)
    worst = np.inf
    for texture in ("checker", "stripes", "logo-dot"):
        for seed in range(4):
            img = rgba(make_texture(texture, hw, seed), full)
            for _ in range(5):
                q = Quad.from_array(random_quad_array(rng, (100, 100), 64))
                back = render_patch(normalize_patch(img, full, q), q, hw)
                inner = ndimage.binary_erosion(back.validity, iterations=2)
                mse = float(((back.image[inner].astype(np.float64) - img[inner]) ** 2).mean())
                worst = min(worst, 10 * np.log10(1.0 / mse) if mse > 0 else np.inf)
    img, mask, pose = make_tpose_fixture(0)
    res = warp_garment(img, mask, pose, pose)
    region = mask & quad_union_mask(res.source_layout, mask.shape)
    iou = (res.garment.mask & region).sum() / (res.garment.mask | region).sum()
    ok = worst >= 30.0 and iou >= 0.85
    report(4, "round-trip warp fidelity", ok, f"min PSNR {worst:.2f} dB (>= 30) over 60 quads; identity-pose IoU {iou:.5f} (>= 0.85)")
    assert ok


def test_05_mask_partition(report):
    every = ((np.arange(1 << 16)[:, None] >> np.arange(16)) & 1).astype(bool).reshape(-1, 4, 4)
    scrambled = every[(np.arange(1 << 16) * 40503) % (1 << 16)]
    tile = lambda st: np.ascontiguousarray(st.transpose(1, 0, 2).reshape(4, -1))
    bad = 0
    m = compute_alignment(tile(every), tile(scrambled))
    bad += bool((m.aligned & m.misaligned).any()) or not np.array_equal(m.aligned | m.misaligned, tile(every))
    rng = np.random.default_rng(105)
    for _ in range(10_000):
        mg = rng.random((64, 64)) < rng.random()
        mt = rng.random((64, 64)) < rng.random()
        m = compute_alignment(mg, mt)
        bad += bool((m.aligned & m.misaligned).any()) or not np.array_equal(m.aligned | m.misaligned, mg)
    ok = bad == 0
    report(5, "mask-algebra partition", ok, f"{bad} violations over 2^16 exhaustive 4x4 pairs + 10,000 random 64x64 pairs")
    assert ok


def test_06_inpainting_contract(report):
    rng = np.random.default_rng(106)
    outside_exact = True
    mean_dev = oracle_dev = 0.0
    cases = 0
    while cases < 1000:
        c, h, w = rng.integers(1, 5), rng.integers(2, 10), rng.integers(2, 10)
        f = rng.normal(size=(c, h, w)).astype(np.float32)
        m = compute_alignment(rng.random((h, w)) < 0.6, rng.random((h, w)) < 0.6)
        if m.misaligned.any() and not m.aligned.any():
            continue
        cases += 1
        out = inpaint_features(f, m)
        outside_exact &= out[:, ~m.misaligned].tobytes() == f[:, ~m.misaligned].tobytes()
        if m.misaligned.any():
            means = f[:, m.aligned].astype(np.float64).mean(axis=1)
            mean_dev = max(mean_dev, np.abs(out[:, m.misaligned] - means[:, None]).max())
        oracle_dev = max(oracle_dev, np.abs(out - oracle_inpaint(f, m.aligned, m.misaligned)).max())
    ok = outside_exact and mean_dev < 1e-5 and oracle_dev < 1e-6
    report(6, "inpainting contract", ok,
           f"outside bit-exact={outside_exact}, mean dev {mean_dev:.2e} (< 1e-5), oracle dev {oracle_dev:.2e} (< 1e-6)")
    assert ok


def test_07_modulation_statistics(report):
    rng = np.random.default_rng(107)
    mu_worst = sd_worst = oracle_worst = 0.0
    for _ in range(100):
        h = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 5), size=(8, 16, 16)).astype(np.float32)
        ones = AffineParams(np.ones_like(h), np.zeros_like(h))
        mu, sd = channel_stats(spade_modulate(h, ones, eps=0.0))
        mu_worst = max(mu_worst, np.abs(mu).max())
        sd_worst = max(sd_worst, np.abs(sd - 1).max())
        g, b = (rng.normal(size=h.shape).astype(np.float32) for _ in range(2))
        out = spade_modulate(h, AffineParams(g, b), 1e-5)
        oracle_worst = max(oracle_worst, np.abs(out - oracle_modulate(h, g, b, 1e-5)).max())
    ok = mu_worst < 1e-5 and sd_worst < 1e-4 and oracle_worst < 1e-5
    report(7, "modulation statistics", ok,
           f"max |mu| {mu_worst:.2e} (< 1e-5), max |sigma-1| {sd_worst:.2e} (< 1e-4), oracle dev {oracle_worst:.2e} (< 1e-5)")
    assert ok


def test_08_gradients_and_conv(report):
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(100):
        h, g, b, up = (rng.normal(size=(2, 4, 4)) for _ in range(4))
        gh, gg, gb = spade_backward(h, AffineParams(g, b), 1e-5, up)
        loss = lambda hh, gg_, bb: float((up * spade_modulate(hh, AffineParams(gg_, bb), 1e-5)).sum())
        worst = max(worst,
                    relative_error(gh, central_difference(lambda x: loss(x, g, b), h)),
                    relative_error(gg, central_difference(lambda x: loss(h, x, b), g)),
                    relative_error(gb, central_difference(lambda x: loss(h, g, x), b)))
    conv_worst = 0.0
    for k in (1, 3, 5):
        for seed in range(5):
            p = random_conv_params(2, 3, k, seed)
            x = rng.normal(size=(2, 5, 5)).astype(np.float32)
            conv_worst = max(conv_worst, np.abs(conv2d_same(x, p) - oracle_conv2d(x, p.weight, p.bias)).max())
    ok = worst < 1e-3 and conv_worst < 1e-5
    report(8, "gradient verification", ok,
           f"max relative error {worst:.2e} over 100 cases (< 1e-3); conv oracle dev {conv_worst:.2e} (< 1e-5)")
    assert ok


def test_09_loss_constants(report):
    w = LossWeights()
    v = total_loss({"gan": 0.0, "rec": 1.0, "perc": 1.0, "mask": 1.0})
    ok = (w.lambda_rec, w.lambda_perc, w.lambda_mask) == (40.0, 40.0, 100.0) and v == 180.0
    report(9, "loss constants", ok, f"lambdas {(w.lambda_rec, w.lambda_perc, w.lambda_mask)}, total_loss(0,1,1,1) = {v!r}")
    assert ok


def test_10_random_erase_statistics(report):
    img, mask, pose = make_tpose_fixture(0)
    g = warp_garment(img, mask, pose, pose).garment
    n = 10_000
    arm = erase = 0
    for s in range(n):
        plan = plan_erase(g, EraseConfig(alpha1=0.2, alpha2=0.9, seed=s))
        arm += plan.dropped_role is not None
        erase += plan.erase_fired
    identical = True
    for s in range(20):
        cfg = EraseConfig(seed=s)
        a, b = random_erase(g, cfg), random_erase(g, cfg)
        identical &= all(x.tobytes() == y.tobytes() for x, y in
                         ((a.image, b.image), (a.mask, b.mask), (a.provenance, b.provenance)))
    ra, re = arm / n, erase / n
    ok = 0.188 <= ra <= 0.212 and 0.884 <= re <= 0.916 and identical
    report(10, "random-erase statistics", ok,
           f"arm-drop rate {ra:.4f} in [0.188, 0.212], erase rate {re:.4f} in [0.884, 0.916], same-seed byte-identical={identical}")
    assert ok


def test_11_cli_end_to_end(report, tmp_path):
    write_bundle(tmp_path / "in", seed=0, target_offset=(8, -4))
    codes = [main(["warp", "--config", str(tmp_path / "in" / "job.json"), "--out", str(tmp_path / run), "--augment"])
             for run in ("a", "b")]
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    expected = sorted([f"normalized_{r.value}.png" for r in UPPER_ROLES]
                      + ["manifest.json", "provenance.png", "warped_garment.png", "warped_mask.png"])
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)

    t0 = time.perf_counter()
    checks_ok = all(r[1] for r in run_checks())
    selfcheck_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    rest = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(REPO / "tests"),
                           "--ignore", str(REPO / "tests" / "test_acceptance.py")],
                          cwd=REPO, capture_output=True, text=True)
    rest_s = time.perf_counter() - t0
    acceptance_s = time.perf_counter() - MODULE_START - selfcheck_s - rest_s
    total = rest_s + acceptance_s + selfcheck_s
    ok = (codes == [0, 0] and names == expected and same and checks_ok
          and rest.returncode == 0 and total < 60.0)
    report(11, "CLI end-to-end", ok,
           f"exit codes {codes}, {len(names)} files, reruns byte-identical={same}, selfcheck pass={checks_ok}; "
           f"unit suite {rest_s:.1f} s + acceptance {acceptance_s:.1f} s + selfcheck {selfcheck_s:.1f} s = {total:.1f} s (< 60 s)")
    assert ok, rest.stdout[-2000:]
