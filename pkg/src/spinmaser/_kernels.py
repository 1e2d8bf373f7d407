"""Numba inner loops for the discretized feedback Bloch equations.

The state is three contiguous float64 arrays (px, py, pz) of length M.  The
feedback couples every spin to the weighted ensemble average, so one RK4 stage
is two reductions plus elementwise work; everything here is allocation-free in
the step loop.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def _rates(px, py, pz, freqs, weights, alpha, t1, t2, p0, lx, gy, s,
           kx, ky, kz):
    """Right-hand side of the discretized Bloch equations into kx, ky, kz."""
    m = px.size
    pbx = 0.0
    pby = 0.0
    for i in range(m):
        pbx += weights[i] * px[i]
        pby += weights[i] * py[i]
    fx = (alpha + s) * pbx + lx
    fy = (alpha + s) * pby + gy
    for i in range(m):
        kx[i] = freqs[i] * py[i] + fx * pz[i] - px[i] / t2
        ky[i] = -freqs[i] * px[i] + fy * pz[i] - py[i] / t2
        kz[i] = -(fx * px[i] + fy * py[i]) - (pz[i] - p0) / t1


@njit(cache=True)
def rk4_run(px, py, pz, freqs, weights, alpha, t1, t2, p0, dt,
            record_every, rec_px, rec_py, rec_pz,
            noise_l, noise_g, noise_s, max_norm2):
    """Advance (record_every * (nrec-1)) RK4 steps, recording ensemble averages.

    rec_* have length nrec; index 0 is the initial state.  Noise arrays are
    either empty (noise-free) or hold one sample per step, held constant
    across the four substeps.  max_norm2 (length M) accumulates the running
    per-spin maximum of |P|^2.  Returns -1 on success, else the step index at
    which a non-finite average first appeared.
    """
    m = px.size
    nrec = rec_px.size
    nsteps = (nrec - 1) * record_every
    has_noise = noise_l.size > 0

    ax = np.empty(m)
    ay = np.empty(m)
    az = np.empty(m)
    bx = np.empty(m)
    by = np.empty(m)
    bz = np.empty(m)
    cx = np.empty(m)
    cy = np.empty(m)
    cz = np.empty(m)
    dx = np.empty(m)
    dy = np.empty(m)
    dz = np.empty(m)
    tx = np.empty(m)
    ty = np.empty(m)
    tz = np.empty(m)

    pbx = 0.0
    pby = 0.0
    pbz = 0.0
    for i in range(m):
        pbx += weights[i] * px[i]
        pby += weights[i] * py[i]
        pbz += weights[i] * pz[i]
        n2 = px[i] * px[i] + py[i] * py[i] + pz[i] * pz[i]
        if n2 > max_norm2[i]:
            max_norm2[i] = n2
    rec_px[0] = pbx
    rec_py[0] = pby
    rec_pz[0] = pbz

    rec = 1
    for step in range(nsteps):
        if has_noise:
            lx = noise_l[step]
            gy = noise_g[step]
            s = noise_s[step]
        else:
            lx = 0.0
            gy = 0.0
            s = 0.0

        _rates(px, py, pz, freqs, weights, alpha, t1, t2, p0, lx, gy, s, ax, ay, az)
        for i in range(m):
            tx[i] = px[i] + 0.5 * dt * ax[i]
            ty[i] = py[i] + 0.5 * dt * ay[i]
            tz[i] = pz[i] + 0.5 * dt * az[i]
        _rates(tx, ty, tz, freqs, weights, alpha, t1, t2, p0, lx, gy, s, bx, by, bz)
        for i in range(m):
            tx[i] = px[i] + 0.5 * dt * bx[i]
            ty[i] = py[i] + 0.5 * dt * by[i]
            tz[i] = pz[i] + 0.5 * dt * bz[i]
        _rates(tx, ty, tz, freqs, weights, alpha, t1, t2, p0, lx, gy, s, cx, cy, cz)
        for i in range(m):
            tx[i] = px[i] + dt * cx[i]
            ty[i] = py[i] + dt * cy[i]
            tz[i] = pz[i] + dt * cz[i]
        _rates(tx, ty, tz, freqs, weights, alpha, t1, t2, p0, lx, gy, s, dx, dy, dz)

        for i in range(m):
            px[i] += dt / 6.0 * (ax[i] + 2.0 * bx[i] + 2.0 * cx[i] + dx[i])
            py[i] += dt / 6.0 * (ay[i] + 2.0 * by[i] + 2.0 * cy[i] + dy[i])
            pz[i] += dt / 6.0 * (az[i] + 2.0 * bz[i] + 2.0 * cz[i] + dz[i])
            n2 = px[i] * px[i] + py[i] * py[i] + pz[i] * pz[i]
            if n2 > max_norm2[i]:
                max_norm2[i] = n2

        if (step + 1) % record_every == 0:
            pbx = 0.0
            pby = 0.0
            pbz = 0.0
            for i in range(m):
                pbx += weights[i] * px[i]
                pby += weights[i] * py[i]
                pbz += weights[i] * pz[i]
            rec_px[rec] = pbx
            rec_py[rec] = pby
            rec_pz[rec] = pbz
            rec += 1
            if not (np.isfinite(pbx) and np.isfinite(pby) and np.isfinite(pbz)):
                return step
    return -1


@njit(cache=True, fastmath=False)
def _tangent_rates(px, py, pz, qx, qy, qz, freqs, weights, alpha, t1, t2,
                   jx, jy, jz):
    """Jacobian-vector product of the noise-free equations at (px,py,pz)."""
    m = px.size
    pbx = 0.0
    pby = 0.0
    qbx = 0.0
    qby = 0.0
    for i in range(m):
        pbx += weights[i] * px[i]
        pby += weights[i] * py[i]
        qbx += weights[i] * qx[i]
        qby += weights[i] * qy[i]
    for i in range(m):
        jx[i] = freqs[i] * qy[i] + alpha * (qbx * pz[i] + pbx * qz[i]) - qx[i] / t2
        jy[i] = -freqs[i] * qx[i] + alpha * (qby * pz[i] + pby * qz[i]) - qy[i] / t2
        jz[i] = -alpha * (qbx * px[i] + pbx * qx[i] + qby * py[i] + pby * qy[i]) - qz[i] / t1


@njit(cache=True)
def rk4_tangent_run(px, py, pz, qx, qy, qz, freqs, weights,
                    alpha, t1, t2, p0, dt, nsteps):
    """Advance state and one tangent vector together for nsteps RK4 steps."""
    m = px.size
    sx = np.empty((4, m))
    sy = np.empty((4, m))
    sz = np.empty((4, m))
    ux = np.empty((4, m))
    uy = np.empty((4, m))
    uz = np.empty((4, m))
    tpx = np.empty(m)
    tpy = np.empty(m)
    tpz = np.empty(m)
    tqx = np.empty(m)
    tqy = np.empty(m)
    tqz = np.empty(m)

    coef = np.array([0.0, 0.5, 0.5, 1.0])
    for _ in range(nsteps):
        for stage in range(4):
            c = coef[stage] * dt
            if stage == 0:
                for i in range(m):
                    tpx[i] = px[i]
                    tpy[i] = py[i]
                    tpz[i] = pz[i]
                    tqx[i] = qx[i]
                    tqy[i] = qy[i]
                    tqz[i] = qz[i]
            else:
                prev = stage - 1
                for i in range(m):
                    tpx[i] = px[i] + c * sx[prev, i]
                    tpy[i] = py[i] + c * sy[prev, i]
                    tpz[i] = pz[i] + c * sz[prev, i]
                    tqx[i] = qx[i] + c * ux[prev, i]
                    tqy[i] = qy[i] + c * uy[prev, i]
                    tqz[i] = qz[i] + c * uz[prev, i]
            _rates(tpx, tpy, tpz, freqs, weights, alpha, t1, t2, p0,
                   0.0, 0.0, 0.0, sx[stage], sy[stage], sz[stage])
            _tangent_rates(tpx, tpy, tpz, tqx, tqy, tqz, freqs, weights,
                           alpha, t1, t2, ux[stage], uy[stage], uz[stage])
        for i in range(m):
            px[i] += dt / 6.0 * (sx[0, i] + 2 * sx[1, i] + 2 * sx[2, i] + sx[3, i])
            py[i] += dt / 6.0 * (sy[0, i] + 2 * sy[1, i] + 2 * sy[2, i] + sy[3, i])
            pz[i] += dt / 6.0 * (sz[0, i] + 2 * sz[1, i] + 2 * sz[2, i] + sz[3, i])
            qx[i] += dt / 6.0 * (ux[0, i] + 2 * ux[1, i] + 2 * ux[2, i] + ux[3, i])
            qy[i] += dt / 6.0 * (uy[0, i] + 2 * uy[1, i] + 2 * uy[2, i] + uy[3, i])
            qz[i] += dt / 6.0 * (uz[0, i] + 2 * uz[1, i] + 2 * uz[2, i] + uz[3, i])
