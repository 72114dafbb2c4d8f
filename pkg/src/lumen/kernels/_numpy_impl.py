"""Pure-numpy kernel implementations (fallback backend).

Vectorized where the data dependencies allow it; the PNG Average/Paeth
filters and the per-row scan they require stay as Python loops, which is
acceptable at manuscript-photo scale.
"""

import numpy as np

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_BREAKDOWN = 2


def unfilter_scanlines(raw, bpp):
    """Reverse PNG scanline filtering.

    raw: uint8 array (rows, 1 + rowbytes), first byte of each row is the
    filter type (already validated to be 0..4). Returns (rows, rowbytes).
    """
    nrows, rowbytes = raw.shape[0], raw.shape[1] - 1
    out = np.zeros((nrows, rowbytes), dtype=np.uint8)
    prev = np.zeros(rowbytes, dtype=np.uint8)
    npix = rowbytes // bpp
    for y in range(nrows):
        ftype = int(raw[y, 0])
        line = raw[y, 1:]
        if ftype == 0:
            rec = line.copy()
        elif ftype == 1:  # Sub: cumulative sum with stride bpp, mod 256
            rec = np.add.accumulate(
                line.reshape(npix, bpp), axis=0, dtype=np.uint8
            ).reshape(rowbytes)
        elif ftype == 2:  # Up
            rec = line + prev
        elif ftype == 3:  # Average: sequential in x
            rec = line.copy()
            for x in range(rowbytes):
                left = int(rec[x - bpp]) if x >= bpp else 0
                rec[x] = (int(line[x]) + ((left + int(prev[x])) >> 1)) & 0xFF
        else:  # Paeth
            rec = line.copy()
            for x in range(rowbytes):
                a = int(rec[x - bpp]) if x >= bpp else 0
                b = int(prev[x])
                c = int(prev[x - bpp]) if x >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                rec[x] = (int(line[x]) + pred) & 0xFF
        out[y] = rec
        prev = rec
    return out


def spmv(offsets, cols, vals, x):
    """CSR matrix-vector product."""
    n = offsets.size - 1
    if vals.size == 0:
        return np.zeros(n)
    row_ids = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets))
    return np.bincount(row_ids, weights=vals * x[cols], minlength=n)


def cg_sweep(offsets, cols, vals, b, x0, tol_abs, max_iter):
    """One conjugate-gradient run. Returns (x, iterations, status)."""
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


def bicgstab_sweep(offsets, cols, vals, b, x0, tol_abs, max_iter):
    """One BiCGStab run. Returns (x, iterations, status).

    STATUS_BREAKDOWN signals a vanishing inner product; the caller decides
    whether to restart from the current iterate.
    """
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


def grow_from_seed(img, sy, sx, tol):
    """4-connected region of pixels whose Euclidean intensity distance to
    the seed pixel value is <= tol. img: float64 (h, w, c). Returns bool mask.
    """
    dist = np.sqrt(((img - img[sy, sx]) ** 2).sum(axis=2))
    ok = dist <= tol
    region = np.zeros(ok.shape, dtype=bool)
    frontier = np.zeros(ok.shape, dtype=bool)
    frontier[sy, sx] = True
    region[sy, sx] = True
    while frontier.any():
        nxt = np.zeros_like(frontier)
        nxt[1:, :] |= frontier[:-1, :]
        nxt[:-1, :] |= frontier[1:, :]
        nxt[:, 1:] |= frontier[:, :-1]
        nxt[:, :-1] |= frontier[:, 1:]
        frontier = nxt & ok & ~region
        region |= frontier
    return region


def best_source_patch(img, known, valid, ty, tx, half, sy_lo, sy_hi, sx_lo, sx_hi):
    """Exhaustive minimum-SSD source search for one target patch.

    img: float64 (h, w, c); known: uint8 (h, w); valid: uint8 (h, w), true
    at centers whose patch is fully in-bounds and fully known. The search
    box [sy_lo..sy_hi] x [sx_lo..sx_hi] is inclusive and already clamped.
    Ties resolve to the smallest row-major (sy, sx). Returns
    (ssd, sy, sx) with sy = -1 when no valid candidate exists.
    """
    h, w, c = img.shape
    ps = 2 * half + 1
    # zero-padded target patch and per-pixel weights (in-bounds and known)
    tpatch = np.zeros((ps, ps, c))
    tweight = np.zeros((ps, ps))
    y0, y1 = max(0, ty - half), min(h - 1, ty + half)
    x0, x1 = max(0, tx - half), min(w - 1, tx + half)
    oy, ox = y0 - (ty - half), x0 - (tx - half)
    tpatch[oy : oy + y1 - y0 + 1, ox : ox + x1 - x0 + 1] = img[y0 : y1 + 1, x0 : x1 + 1]
    tweight[oy : oy + y1 - y0 + 1, ox : ox + x1 - x0 + 1] = known[y0 : y1 + 1, x0 : x1 + 1]

    if sy_hi < sy_lo or sx_hi < sx_lo:
        return np.inf, -1, -1

    windows = np.lib.stride_tricks.sliding_window_view(img, (ps, ps), axis=(0, 1))
    # windows[cy, cx, ch, dy, dx] = img[cy + dy, cx + dx, ch]
    tref = tpatch.transpose(2, 0, 1)  # (c, ps, ps)

    best_ssd = np.inf
    best_sy = -1
    best_sx = -1
    nx = sx_hi - sx_lo + 1
    # row-blocked to bound the temporary (block, nx, c, ps, ps) array
    block = max(1, int(4e6 // max(1, nx * c * ps * ps)))
    for cy0 in range(sy_lo, sy_hi + 1, block):
        cy1 = min(cy0 + block - 1, sy_hi)
        sub = windows[cy0 - half : cy1 - half + 1, sx_lo - half : sx_hi - half + 1]
        diff = sub - tref[None, None]
        ssd = np.einsum("yxcij,ij->yx", diff * diff, tweight)
        vbox = valid[cy0 : cy1 + 1, sx_lo : sx_hi + 1].astype(bool)
        if not vbox.any():
            continue
        ssd = np.where(vbox, ssd, np.inf)
        flat = int(np.argmin(ssd))
        cand = float(ssd.flat[flat])
        if cand < best_ssd:
            best_ssd = cand
            best_sy = cy0 + flat // nx
            best_sx = sx_lo + flat % nx
    return best_ssd, best_sy, best_sx
