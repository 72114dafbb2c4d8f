"""Numba-compiled kernel implementations.

Same arithmetic as the numpy fallback; @njit(cache=True) keeps compilation
a one-time cost per environment. fastmath stays off: the solvers and the
osmosis operator rely on exact IEEE cancellation.
"""

import numpy as np
from numba import njit

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_BREAKDOWN = 2


@njit(cache=True)
def unfilter_scanlines(raw, bpp):
    nrows = raw.shape[0]
    rowbytes = raw.shape[1] - 1
    out = np.zeros((nrows, rowbytes), dtype=np.uint8)
    for y in range(nrows):
        ftype = int(raw[y, 0])
        for x in range(rowbytes):
            cur = int(raw[y, 1 + x])
            left = int(out[y, x - bpp]) if x >= bpp else 0
            up = int(out[y - 1, x]) if y > 0 else 0
            if ftype == 0:
                val = cur
            elif ftype == 1:
                val = cur + left
            elif ftype == 2:
                val = cur + up
            elif ftype == 3:
                val = cur + ((left + up) >> 1)
            else:
                ul = int(out[y - 1, x - bpp]) if (x >= bpp and y > 0) else 0
                p = left + up - ul
                pa = abs(p - left)
                pb = abs(p - up)
                pc = abs(p - ul)
                if pa <= pb and pa <= pc:
                    pred = left
                elif pb <= pc:
                    pred = up
                else:
                    pred = ul
                val = cur + pred
            out[y, x] = val & 0xFF
    return out


@njit(cache=True)
def spmv(offsets, cols, vals, x):
    n = offsets.size - 1
    y = np.zeros(n)
    for i in range(n):
        s = 0.0
        for k in range(offsets[i], offsets[i + 1]):
            s += vals[k] * x[cols[k]]
        y[i] = s
    return y


@njit(cache=True)
def cg_sweep(offsets, cols, vals, b, x0, tol_abs, max_iter):
    x = x0.copy()
    r = b - spmv(offsets, cols, vals, x)
    rs = float(r @ r)
    if np.sqrt(rs) <= tol_abs:
        return x, 0, STATUS_CONVERGED
    p = r.copy()
    it = 0
    while it < max_iter:
        ap = spmv(offsets, cols, vals, p)
        pap = float(p @ ap)
        if pap <= 0.0:
            return x, it, STATUS_BREAKDOWN
        alpha = rs / pap
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(r @ r)
        it += 1
        if np.sqrt(rs_new) <= tol_abs:
            return x, it, STATUS_CONVERGED
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, it, STATUS_MAXITER


@njit(cache=True)
def bicgstab_sweep(offsets, cols, vals, b, x0, tol_abs, max_iter):
    x = x0.copy()
    r = b - spmv(offsets, cols, vals, x)
    if np.sqrt(float(r @ r)) <= tol_abs:
        return x, 0, STATUS_CONVERGED
    r0 = r.copy()
    p = r.copy()
    rho = float(r0 @ r)
    if rho == 0.0:
        return x, 0, STATUS_BREAKDOWN
    it = 0
    while it < max_iter:
        v = spmv(offsets, cols, vals, p)
        rv = float(r0 @ v)
        if rv == 0.0:
            return x, it, STATUS_BREAKDOWN
        alpha = rho / rv
        s = r - alpha * v
        if np.sqrt(float(s @ s)) <= tol_abs:
            x = x + alpha * p
            return x, it + 1, STATUS_CONVERGED
        t = spmv(offsets, cols, vals, s)
        tt = float(t @ t)
        if tt == 0.0:
            return x, it, STATUS_BREAKDOWN
        omega = float(t @ s) / tt
        if omega == 0.0:
            return x, it, STATUS_BREAKDOWN
        x = x + alpha * p + omega * s
        r = s - omega * t
        it += 1
        if np.sqrt(float(r @ r)) <= tol_abs:
            return x, it, STATUS_CONVERGED
        rho_new = float(r0 @ r)
        if rho_new == 0.0:
            return x, it, STATUS_BREAKDOWN
        beta = (alpha / omega) * (rho_new / rho)
        rho = rho_new
        p = r + beta * (p - omega * v)
    return x, it, STATUS_MAXITER


@njit(cache=True)
def grow_from_seed(img, sy, sx, tol):
    h, w, c = img.shape
    region = np.zeros((h, w), dtype=np.bool_)
    queue = np.empty(h * w, dtype=np.int64)
    head = 0
    tail = 0
    region[sy, sx] = True
    queue[tail] = sy * w + sx
    tail += 1
    while head < tail:
        flat = queue[head]
        head += 1
        y = flat // w
        x = flat % w
        for d in range(4):
            ny = y + (1 if d == 0 else (-1 if d == 1 else 0))
            nx = x + (1 if d == 2 else (-1 if d == 3 else 0))
            if ny < 0 or ny >= h or nx < 0 or nx >= w or region[ny, nx]:
                continue
            d2 = 0.0
            for ch in range(c):
                diff = img[ny, nx, ch] - img[sy, sx, ch]
                d2 += diff * diff
            if np.sqrt(d2) <= tol:
                region[ny, nx] = True
                queue[tail] = ny * w + nx
                tail += 1
    return region


@njit(cache=True)
def best_source_patch(img, known, valid, ty, tx, half, sy_lo, sy_hi, sx_lo, sx_hi):
    h, w, c = img.shape
    best_ssd = np.inf
    best_sy = -1
    best_sx = -1
    for sy in range(sy_lo, sy_hi + 1):
        for sx in range(sx_lo, sx_hi + 1):
            if valid[sy, sx] == 0:
                continue
            ssd = 0.0
            abort = False
            for dy in range(-half, half + 1):
                yy = ty + dy
                if yy < 0 or yy >= h:
                    continue
                for dx in range(-half, half + 1):
                    xx = tx + dx
                    if xx < 0 or xx >= w or known[yy, xx] == 0:
                        continue
                    for ch in range(c):
                        diff = img[yy, xx, ch] - img[sy + dy, sx + dx, ch]
                        ssd += diff * diff
                if ssd >= best_ssd:
                    abort = True
                    break
            if not abort and ssd < best_ssd:
                best_ssd = ssd
                best_sy = sy
                best_sx = sx
    return best_ssd, best_sy, best_sx
