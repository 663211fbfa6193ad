"""Independent brute-force oracles used to pin expected values.

Everything here is written as plain numpy float64 loops, on purpose: these
implementations share no code with the package and trade speed for
obviousness.
"""

from __future__ import annotations

import numpy as np

SH_C0 = 0.28209479177
COV_DILATION = 0.3
ALPHA_CLAMP = 0.99
Z_NEAR = 1e-4


def quat_to_mat(q):
    q = np.asarray(q, dtype=np.float64)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def sh0_color(sh0):
    return np.clip(SH_C0 * np.asarray(sh0, dtype=np.float64) + 0.5, 0.0, None)


def brute_force_render(scene_np, cam_np, background=(0.0, 0.0, 0.0)):
    """Per-pixel compositing loop over all Gaussians, exact z sorting.

    scene_np: dict with keys means (N,3), rotations (N,4), scales (N,3),
    opacities (N,), sh0 (N,3) [degree-0 coefficients only].
    cam_np: dict with fx, fy, cx, cy, w2c (4,4), width, height.
    Returns (color HxWx3, depth HxW, alpha HxW) float64 arrays.
    """
    means = np.asarray(scene_np["means"], dtype=np.float64)
    rots = np.asarray(scene_np["rotations"], dtype=np.float64)
    scales = np.asarray(scene_np["scales"], dtype=np.float64)
    opac = np.asarray(scene_np["opacities"], dtype=np.float64)
    sh0 = np.asarray(scene_np["sh0"], dtype=np.float64)
    w2c = np.asarray(cam_np["w2c"], dtype=np.float64)
    fx, fy, cx, cy = cam_np["fx"], cam_np["fy"], cam_np["cx"], cam_np["cy"]
    width, height = cam_np["width"], cam_np["height"]

    r_wc = w2c[:3, :3]
    t_wc = w2c[:3, 3]
    cam_center = -r_wc.T @ t_wc

    splats = []
    for i in range(means.shape[0]):
        p = r_wc @ means[i] + t_wc
        z = p[2]
        if z <= Z_NEAR:
            continue
        u = fx * p[0] / z + cx
        v = fy * p[1] / z + cy
        rot = quat_to_mat(rots[i])
        cov3 = rot @ np.diag(scales[i] ** 2) @ rot.T
        cov_cam = r_wc @ cov3 @ r_wc.T
        jac = np.array([
            [fx / z, 0.0, -fx * p[0] / z ** 2],
            [0.0, fy / z, -fy * p[1] / z ** 2],
        ])
        cov2 = jac @ cov_cam @ jac.T + COV_DILATION * np.eye(2)
        d = means[i] - cam_center
        d = d / np.linalg.norm(d)
        color = sh0_color(sh0[i])
        splats.append((z, u, v, np.linalg.inv(cov2), opac[i], color))
    splats.sort(key=lambda s: s[0])

    bg = np.asarray(background, dtype=np.float64)
    color_img = np.zeros((height, width, 3))
    alpha_img = np.zeros((height, width))
    depth_img = np.zeros((height, width))
    for row in range(height):
        for col in range(width):
            trans = 1.0
            for z, u, v, inv_cov, op, col_rgb in splats:
                d = np.array([col - u, row - v])
                weight = min(op * np.exp(-0.5 * d @ inv_cov @ d), ALPHA_CLAMP)
                contrib = weight * trans
                color_img[row, col] += contrib * col_rgb
                alpha_img[row, col] += contrib
                depth_img[row, col] += contrib * z
                trans *= 1.0 - weight
            color_img[row, col] += trans * bg
    covered = alpha_img > 0
    depth_img[covered] = depth_img[covered] / alpha_img[covered]
    depth_img[~covered] = 0.0
    return color_img, depth_img, alpha_img


def channel_stats_two_pass(activations):
    """Channel-wise mean/std via explicit two-pass loops. (C, H, W) input."""
    act = np.asarray(activations, dtype=np.float64)
    c = act.shape[0]
    means = np.zeros(c)
    stds = np.zeros(c)
    for ch in range(c):
        total = 0.0
        count = 0
        for val in act[ch].flat:
            total += val
            count += 1
        mean = total / count
        sq = 0.0
        for val in act[ch].flat:
            sq += (val - mean) ** 2
        means[ch] = mean
        stds[ch] = np.sqrt(sq / count)
    return means, stds
