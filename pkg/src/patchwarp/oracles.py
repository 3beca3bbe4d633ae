"""Naive reference implementations used to cross-check the production code.

Nothing here imports from the rest of the package: every routine is a plain
loop over the defining formula so that it fails independently of the code it
checks. Inputs are plain sequences or numpy arrays; numpy is used only as a
container.
"""
import math

import numpy as np


def oracle_homography(src, dst):
    """3x3 list-of-lists homography (h33 = 1) mapping 4 src points onto 4 dst points.

    Builds the 8x8 system and solves it by Gaussian elimination with partial
    pivoting.
    """
    rows = []
    for (x, y), (u, v) in zip(src, dst):
        x, y, u, v = float(x), float(y), float(u), float(v)
        rows.append([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u])
        rows.append([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v])
    n = 8
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(rows[r][col]))
        if abs(rows[piv][col]) < 1e-300:
            raise ZeroDivisionError("singular 8x8 system")
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(col + 1, n):
            f = rows[r][col] / rows[col][col]
            for c in range(col, n + 1):
                rows[r][c] -= f * rows[col][c]
    h = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = rows[r][n]
        for c in range(r + 1, n):
            acc -= rows[r][c] * h[c]
        h[r] = acc / rows[r][r]
    return [h[0:3], h[3:6], [h[6], h[7], 1.0]]


def oracle_apply(m, x, y):
    w = m[2][0] * x + m[2][1] * y + m[2][2]
    return ((m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w)


def oracle_bilinear(img, u, v):
    """Sample ``img`` (H, W, C) at continuous point (u, v); pixel (r, c) has its centre at (c+.5, r+.5).

    Out-of-range neighbours contribute zero.
    """
    h, w = img.shape[:2]
    fx, fy = u - 0.5, v - 0.5
    x0, y0 = math.floor(fx), math.floor(fy)
    ax, ay = fx - x0, fy - y0
    out = [0.0] * img.shape[2]
    for dy, wy in ((0, 1 - ay), (1, ay)):
        for dx, wx in ((0, 1 - ax), (1, ax)):
            r, c = y0 + dy, x0 + dx
            if 0 <= r < h and 0 <= c < w:
                for k in range(img.shape[2]):
                    out[k] += wy * wx * float(img[r, c, k])
    return out


def oracle_point_in_mask(mask, u, v):
    h, w = mask.shape
    c, r = math.floor(u), math.floor(v)
    return 0 <= r < h and 0 <= c < w and bool(mask[r, c])


def oracle_resample(img, m_dst_to_src, out_h, out_w):
    """Inverse-mapped bilinear warp with plain loops; returns (H, W, C) float64."""
    out = np.zeros((out_h, out_w, img.shape[2]))
    for i in range(out_h):
        for j in range(out_w):
            u, v = oracle_apply(m_dst_to_src, j + 0.5, i + 0.5)
            out[i, j] = oracle_bilinear(img, u, v)
    return out


def oracle_box_downsample(img, factor):
    h, w = img.shape[0] // factor, img.shape[1] // factor
    out = np.zeros((h, w) + img.shape[2:])
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(factor):
                for b in range(factor):
                    acc = acc + img[i * factor + a, j * factor + b].astype(np.float64)
            out[i, j] = acc / (factor * factor)
    return out


def oracle_channel_stats(h):
    """Two-pass population mean and standard deviation per channel of a (C, H, W) array."""
    c, hh, ww = h.shape
    mus, sigmas = [], []
    for z in range(c):
        s = 0.0
        for y in range(hh):
            for x in range(ww):
                s += float(h[z, y, x])
        mu = s / (hh * ww)
        ss = 0.0
        for y in range(hh):
            for x in range(ww):
                ss += (float(h[z, y, x]) - mu) ** 2
        mus.append(mu)
        sigmas.append(math.sqrt(ss / (hh * ww)))
    return np.array(mus), np.array(sigmas)


def oracle_modulate(h, gamma, beta, eps):
    mu, sigma = oracle_channel_stats(h)
    out = np.zeros(h.shape)
    c, hh, ww = h.shape
    for z in range(c):
        for y in range(hh):
            for x in range(ww):
                out[z, y, x] = (float(gamma[z, y, x]) * (float(h[z, y, x]) - mu[z]) / (sigma[z] + eps)
                                + float(beta[z, y, x]))
    return out


def oracle_conv2d(x, weight, bias):
    """Stride-1, zero-padded 'same' convolution (cross-correlation) of a (Cin, H, W) map."""
    cout, cin, k, _ = weight.shape
    _, hh, ww = x.shape
    p = k // 2
    out = np.zeros((cout, hh, ww))
    for o in range(cout):
        for y in range(hh):
            for xx in range(ww):
                acc = float(bias[o])
                for i in range(cin):
                    for dy in range(k):
                        for dx in range(k):
                            sy, sx = y + dy - p, xx + dx - p
                            if 0 <= sy < hh and 0 <= sx < ww:
                                acc += float(weight[o, i, dy, dx]) * float(x[i, sy, sx])
                out[o, y, xx] = acc
    return out


def oracle_inpaint(f, aligned, misaligned):
    """Sum/count pass over the aligned region, then a fill pass over the misaligned one."""
    c, hh, ww = f.shape
    out = np.array(f, dtype=np.float64)
    for z in range(c):
        s, n = 0.0, 0
        for y in range(hh):
            for x in range(ww):
                if aligned[y, x]:
                    s += float(f[z, y, x])
                    n += 1
        for y in range(hh):
            for x in range(ww):
                if misaligned[y, x]:
                    out[z, y, x] = s / n
    return out


def oracle_l1(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    total = 0.0
    for va, vb in zip(a.ravel().tolist(), b.ravel().tolist()):
        total += abs(va - vb)
    return total / a.size


def oracle_avg_pool2(img):
    """2x2 average pooling of an (H, W, C) image, dropping an odd trailing row/column."""
    h, w = img.shape[0] // 2, img.shape[1] // 2
    out = np.zeros((h, w, img.shape[2]))
    for i in range(h):
        for j in range(w):
            for k in range(img.shape[2]):
                out[i, j, k] = (float(img[2 * i, 2 * j, k]) + float(img[2 * i + 1, 2 * j, k])
                                + float(img[2 * i, 2 * j + 1, k]) + float(img[2 * i + 1, 2 * j + 1, k])) / 4
    return out


def central_difference(func, x, step=1e-3):
    """Gradient of scalar ``func`` at float64 array ``x`` by central differences."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + step
        fp = func(x)
        flat[i] = old - step
        fm = func(x)
        flat[i] = old
        g[i] = (fp - fm) / (2 * step)
    return grad
