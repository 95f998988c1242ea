"""Hot loops: bilinear resampling, red-black SOR sweeps, SAD block matching.

Every kernel has a compiled (``*_nb``) and a vectorized numpy (``*_np``)
form with the same arithmetic.  The public names dispatch on
``HYBRIDLF_PURE_NUMPY``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = ["bilinear_sample", "sor_sweeps", "sad_disparity"]


# ---------------------------------------------------------------------------
# bilinear sampling with border clamp
# ---------------------------------------------------------------------------

@njit
def bilinear_sample_nb(img, dx, dy):
    H, W, C = img.shape
    out = np.empty((H, W, C), dtype=np.float64)
    inside = np.empty((H, W), dtype=np.bool_)
    xmax = W - 1.0
    ymax = H - 1.0
    for i in range(H):
        for j in range(W):
            x = j + dx[i, j]
            y = i + dy[i, j]
            inside[i, j] = x >= 0.0 and x <= xmax and y >= 0.0 and y <= ymax
            if x < 0.0:
                x = 0.0
            elif x > xmax:
                x = xmax
            if y < 0.0:
                y = 0.0
            elif y > ymax:
                y = ymax
            x0 = int(np.floor(x))
            y0 = int(np.floor(y))
            if x0 > W - 2:
                x0 = max(W - 2, 0)
            if y0 > H - 2:
                y0 = max(H - 2, 0)
            x1 = min(x0 + 1, W - 1)
            y1 = min(y0 + 1, H - 1)
            fx = x - x0
            fy = y - y0
            for c in range(C):
                top = (1.0 - fx) * img[y0, x0, c] + fx * img[y0, x1, c]
                bot = (1.0 - fx) * img[y1, x0, c] + fx * img[y1, x1, c]
                out[i, j, c] = (1.0 - fy) * top + fy * bot
    return out, inside


def bilinear_sample_np(img, dx, dy):
    H, W, C = img.shape
    jj, ii = np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
    x = jj + dx
    y = ii + dy
    inside = (x >= 0.0) & (x <= W - 1.0) & (y >= 0.0) & (y <= H - 1.0)
    x = np.clip(x, 0.0, W - 1.0)
    y = np.clip(y, 0.0, H - 1.0)
    x0 = np.minimum(np.floor(x).astype(np.intp), max(W - 2, 0))
    y0 = np.minimum(np.floor(y).astype(np.intp), max(H - 2, 0))
    x1 = np.minimum(x0 + 1, W - 1)
    y1 = np.minimum(y0 + 1, H - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x1]
    bot = (1.0 - fx) * img[y1, x0] + fx * img[y1, x1]
    return (1.0 - fy) * top + fy * bot, inside


def bilinear_sample(img, dx, dy):
    """Sample ``img`` (H, W, C) at ``(col + dx, row + dy)`` for every pixel.

    Coordinates are clamped to the image rectangle.  Returns the float64
    samples and a mask of positions that were in bounds before clamping.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    dx = np.ascontiguousarray(dx, dtype=np.float64)
    dy = np.ascontiguousarray(dy, dtype=np.float64)
    if USE_NUMBA:
        return bilinear_sample_nb(img, dx, dy)
    return bilinear_sample_np(img, dx, dy)


# ---------------------------------------------------------------------------
# red-black SOR for the 2x2 coupled flow increment system
# ---------------------------------------------------------------------------
#
# Per pixel p with neighbour edge weights w_n (already scaled by alpha):
#   (a11 + S) du + a12 dv = b1 + sum w_n du_n
#   a12 du + (a22 + S) dv = b2 + sum w_n dv_n
# wx[i, j] is the edge (i, j)-(i, j+1), wy[i, j] the edge (i, j)-(i+1, j).

@njit
def sor_sweeps_nb(du, dv, a11, a12, a22, b1, b2, wx, wy, n_sweeps, omega):
    H, W = du.shape
    for _ in range(n_sweeps):
        for color in range(2):
            for i in range(H):
                start = (i + color) % 2
                for j in range(start, W, 2):
                    s = 0.0
                    nu = 0.0
                    nv = 0.0
                    if j + 1 < W:
                        w = wx[i, j]
                        s += w
                        nu += w * du[i, j + 1]
                        nv += w * dv[i, j + 1]
                    if j > 0:
                        w = wx[i, j - 1]
                        s += w
                        nu += w * du[i, j - 1]
                        nv += w * dv[i, j - 1]
                    if i + 1 < H:
                        w = wy[i, j]
                        s += w
                        nu += w * du[i + 1, j]
                        nv += w * dv[i + 1, j]
                    if i > 0:
                        w = wy[i - 1, j]
                        s += w
                        nu += w * du[i - 1, j]
                        nv += w * dv[i - 1, j]
                    u_new = (b1[i, j] + nu - a12[i, j] * dv[i, j]) / (a11[i, j] + s + 1e-12)
                    du[i, j] = (1.0 - omega) * du[i, j] + omega * u_new
                    v_new = (b2[i, j] + nv - a12[i, j] * du[i, j]) / (a22[i, j] + s + 1e-12)
                    dv[i, j] = (1.0 - omega) * dv[i, j] + omega * v_new


def _neighbour_weights(wx, wy):
    H, W = wx.shape
    w_right = wx.copy()
    w_right[:, -1] = 0.0
    w_left = np.zeros_like(wx)
    w_left[:, 1:] = wx[:, :-1]
    w_down = wy.copy()
    w_down[-1, :] = 0.0
    w_up = np.zeros_like(wy)
    w_up[1:, :] = wy[:-1, :]
    return w_right, w_left, w_down, w_up


def _neighbour_sum(f, w_right, w_left, w_down, w_up):
    out = np.zeros_like(f)
    out[:, :-1] += w_right[:, :-1] * f[:, 1:]
    out[:, 1:] += w_left[:, 1:] * f[:, :-1]
    out[:-1, :] += w_down[:-1, :] * f[1:, :]
    out[1:, :] += w_up[1:, :] * f[:-1, :]
    return out


def sor_sweeps_np(du, dv, a11, a12, a22, b1, b2, wx, wy, n_sweeps, omega):
    H, W = du.shape
    wr, wl, wd, wu = _neighbour_weights(wx, wy)
    s = wr + wl + wd + wu
    ii, jj = np.indices((H, W))
    masks = [((ii + jj) % 2) == c for c in range(2)]
    den_u = a11 + s + 1e-12
    den_v = a22 + s + 1e-12
    for _ in range(n_sweeps):
        for m in masks:
            nu = _neighbour_sum(du, wr, wl, wd, wu)
            u_new = (b1 + nu - a12 * dv) / den_u
            du[m] = (1.0 - omega) * du[m] + omega * u_new[m]
            nv = _neighbour_sum(dv, wr, wl, wd, wu)
            v_new = (b2 + nv - a12 * du) / den_v
            dv[m] = (1.0 - omega) * dv[m] + omega * v_new[m]


def sor_sweeps(du, dv, a11, a12, a22, b1, b2, wx, wy, n_sweeps, omega):
    """Run ``n_sweeps`` red-black SOR sweeps, updating ``du``/``dv`` in place."""
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (a11, a12, a22, b1, b2, wx, wy)]
    if USE_NUMBA:
        sor_sweeps_nb(du, dv, *args, int(n_sweeps), float(omega))
    else:
        sor_sweeps_np(du, dv, *args, int(n_sweeps), float(omega))


# ---------------------------------------------------------------------------
# sum-of-absolute-differences block matching
# ---------------------------------------------------------------------------

@njit
def sad_disparity_nb(left, right, max_d, r):
    H, W, C = left.shape
    disp = np.zeros((H, W), dtype=np.int64)
    valid = np.zeros((H, W), dtype=np.bool_)
    nh, nw = H - 2 * r, W - 2 * r - max_d
    if nh <= 0 or nw <= 0:
        return disp, valid
    k = 2 * r + 1
    best = np.full((nh, nw), np.inf)
    best_d = np.zeros((nh, nw), dtype=np.int64)
    ii = np.zeros((H + 1, W + 1))
    col = np.zeros(W)
    for d in range(max_d + 1):
        wd = W - d
        # integral image, column sums first like the numpy path
        col[:] = 0.0
        for y in range(H):
            acc = 0.0
            for x in range(wd):
                diff = 0.0
                for c in range(C):
                    diff += abs(left[y, x, c] - right[y, x + d, c])
                col[x] += diff
                acc += col[x]
                ii[y + 1, x + 1] = acc
        for i in range(nh):
            for j in range(nw):
                cost = ii[i + k, j + k] - ii[i, j + k] - ii[i + k, j] + ii[i, j]
                if cost < best[i, j]:
                    best[i, j] = cost
                    best_d[i, j] = d
    for i in range(nh):
        for j in range(nw):
            disp[i + r, j + r] = best_d[i, j]
            valid[i + r, j + r] = True
    return disp, valid


def sad_disparity_np(left, right, max_d, r):
    H, W, C = left.shape
    disp = np.zeros((H, W), dtype=np.int64)
    valid = np.zeros((H, W), dtype=np.bool_)
    ys = slice(r, H - r)
    xs = slice(r, W - r - max_d)
    if H - 2 * r <= 0 or W - 2 * r - max_d <= 0:
        return disp, valid
    best = np.full((H - 2 * r, W - 2 * r - max_d), np.inf)
    best_d = np.zeros(best.shape, dtype=np.int64)
    k = 2 * r + 1
    for d in range(max_d + 1):
        diff = np.zeros((H, W - d))
        for c in range(C):
            diff += np.abs(left[:, : W - d, c] - right[:, d:, c])
        # window sums via integral image
        ii = np.zeros((H + 1, W - d + 1))
        ii[1:, 1:] = diff.cumsum(0).cumsum(1)
        win = ii[k:, k:] - ii[:-k, k:] - ii[k:, :-k] + ii[:-k, :-k]
        cost = win[:, : best.shape[1]]
        better = cost < best
        best[better] = cost[better]
        best_d[better] = d
    disp[ys, xs] = best_d
    valid[ys, xs] = True
    return disp, valid


def sad_disparity(left, right, max_d, r):
    """Integer disparity in ``[0, max_d]`` minimizing windowed SAD.

    ``left(x)`` is compared with ``right(x + d)``; ties keep the smallest d.
    Pixels whose window or any candidate leaves the image are invalid.
    """
    left = np.ascontiguousarray(left, dtype=np.float64)
    right = np.ascontiguousarray(right, dtype=np.float64)
    if USE_NUMBA:
        return sad_disparity_nb(left, right, int(max_d), int(r))
    return sad_disparity_np(left, right, int(max_d), int(r))
