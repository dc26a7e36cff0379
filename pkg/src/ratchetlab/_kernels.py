"""Numba kernels for the path simulations.

All randomness is passed in as pre-drawn arrays so the kernels are pure
functions of their inputs; the Python layer owns the generators.

Brownian steps use exact Gaussian increments of ``B^mu``.  Within a step
the maximum of the Brownian bridge between the two grid values is sampled
exactly, ``m = (b0 + b1 + sqrt((b1 - b0)^2 - 2 dt log U)) / 2``, so the
running maximum (and with it the reflected process and the touch events
X = R) is exact in law at grid points.  For the OU gap the one-step
transition of the reflected process is exact, and a touch of 0 inside a
step is decided with the exact bridge-crossing probability obtained from
the time-changed Brownian representation of OU.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
OVERFLOW = 1


@njit(cache=True)
def _bridge_max(b0, b1, dt, u):
    d = b1 - b0
    return 0.5 * (b0 + b1 + math.sqrt(d * d - 2.0 * dt * math.log(u)))


@njit(cache=True)
def _ou_cross_prob(y0, y1, mu, dt):
    # P(OU bridge from y0 > 0 to y1 > 0 hits 0 within dt)
    e = math.exp(mu * dt)
    return math.exp(-4.0 * mu * y0 * y1 * e / (e * e - 1.0))


@njit(cache=True)
def _exp_clock(u):
    return -math.log(u)


@njit(cache=True)
def bm_ratchet(gamma, mu, x0, dt, normals, aux_u, jump_u, record, xs, rs,
               jt, jrb, jra, jx, tt, tx, out):
    """Graphical construction of the Brownian ratchet on a grid.

    State: driving path ``b`` (= B^mu), level ``s`` (running maximum with
    jump-down resets) and boundary ``r``; the particle is ``x = r + s - b``.
    ``out`` receives (n_jumps, n_touches, status, x_end, r_end).
    """
    n = normals.shape[0]
    cap = jt.shape[0]
    sqdt = math.sqrt(dt)
    b = 0.0
    s = x0
    r = 0.0
    gap = s - b
    ju = 0
    clock = _exp_clock(jump_u[ju])
    ju += 1
    hz = 0.0
    nj = 0
    nt = 0
    waiting = True
    status = OK
    if x0 == 0.0:
        tt[0] = 0.0
        tx[0] = r
        nt = 1
        waiting = False
    if record:
        xs[0] = x0
        rs[0] = 0.0
    for k in range(n):
        db = mu * dt + sqdt * normals[k]
        b1 = b + db
        m = _bridge_max(b, b1, dt, aux_u[k])
        if m >= s:
            s = m
            if waiting:
                tt[nt] = (k + 1) * dt
                tx[nt] = r
                nt += 1
                waiting = False
        gap1 = s - b1
        inc = gamma * 0.5 * (gap + gap1) * dt
        if gamma > 0.0 and hz + inc >= clock:
            frac = (clock - hz) / inc
            # several jumps may fall into one step: the rest of the step is
            # run at the post-jump gap until its hazard stays below the clock
            while True:
                if nj >= cap or ju + 2 > jump_u.shape[0]:
                    status = OVERFLOW
                    break
                u = jump_u[ju]
                ju += 1
                y = u * gap1
                jt[nj] = (k + frac) * dt
                jrb[nj] = r
                jx[nj] = r + gap1
                r = r + (gap1 - y)
                jra[nj] = r
                nj += 1
                s = b1 + y
                gap1 = y
                clock = _exp_clock(jump_u[ju])
                ju += 1
                rate = gamma * y * dt
                if rate * (1.0 - frac) < clock:
                    hz = rate * (1.0 - frac)
                    break
                frac += clock / rate
            if status != OK:
                break
            waiting = True
        else:
            hz += inc
        b = b1
        gap = gap1
        if record:
            xs[k + 1] = r + gap
            rs[k + 1] = r
    out[0] = nj
    out[1] = nt
    out[2] = status
    out[3] = r + gap
    out[4] = r


@njit(cache=True)
def ou_ratchet(gamma, mu, x0, dt, normals, aux_u, jump_u, record, xs, rs,
               jt, jrb, jra, jx, tt, tx, out):
    """Graphical construction of the OU ratchet: reflected OU gap segments
    restarted at each jump from the new gap."""
    n = normals.shape[0]
    cap = jt.shape[0]
    e = math.exp(-mu * dt)
    sd = math.sqrt((1.0 - e * e) / (2.0 * mu))
    g = x0
    r = 0.0
    ju = 0
    clock = _exp_clock(jump_u[ju])
    ju += 1
    hz = 0.0
    nj = 0
    nt = 0
    waiting = True
    status = OK
    if x0 == 0.0:
        tt[0] = 0.0
        tx[0] = r
        nt = 1
        waiting = False
    if record:
        xs[0] = x0
        rs[0] = 0.0
    for k in range(n):
        w_ = g * e + sd * normals[k]
        g1 = abs(w_)
        touched = w_ <= 0.0
        if not touched and g > 0.0:
            touched = aux_u[k] < _ou_cross_prob(g, g1, mu, dt)
        elif not touched:
            touched = True
        if touched and waiting:
            tt[nt] = (k + 1) * dt
            tx[nt] = r
            nt += 1
            waiting = False
        inc = gamma * 0.5 * (g + g1) * dt
        if gamma > 0.0 and hz + inc >= clock:
            frac = (clock - hz) / inc
            while True:
                if nj >= cap or ju + 2 > jump_u.shape[0]:
                    status = OVERFLOW
                    break
                u = jump_u[ju]
                ju += 1
                y = u * g1
                jt[nj] = (k + frac) * dt
                jrb[nj] = r
                jx[nj] = r + g1
                r = r + (g1 - y)
                jra[nj] = r
                nj += 1
                g1 = y
                clock = _exp_clock(jump_u[ju])
                ju += 1
                rate = gamma * y * dt
                if rate * (1.0 - frac) < clock:
                    hz = rate * (1.0 - frac)
                    break
                frac += clock / rate
            if status != OK:
                break
            waiting = True
        else:
            hz += inc
        g = g1
        if record:
            xs[k + 1] = r + g
            rs[k + 1] = r
    out[0] = nj
    out[1] = nt
    out[2] = status
    out[3] = r + g
    out[4] = r


@njit(cache=True)
def rbm_path(mu, x0, dt, normals, aux_u, zs):
    """Reflected BM with drift -mu: Z = (x0 v M) - B^mu on the grid."""
    sqdt = math.sqrt(dt)
    b = 0.0
    s = x0
    zs[0] = x0
    for k in range(normals.shape[0]):
        b1 = b + mu * dt + sqdt * normals[k]
        m = _bridge_max(b, b1, dt, aux_u[k])
        if m > s:
            s = m
        b = b1
        zs[k + 1] = s - b


@njit(cache=True)
def rou_path(mu, x0, dt, normals, zs):
    """Reflected OU via the exact transition |z e^{-mu dt} + sd N|."""
    e = math.exp(-mu * dt)
    sd = math.sqrt((1.0 - e * e) / (2.0 * mu))
    z = x0
    zs[0] = x0
    for k in range(normals.shape[0]):
        z = abs(z * e + sd * normals[k])
        zs[k + 1] = z


@njit(cache=True)
def killed_chunk(is_ou, gamma, mu, dt, normals, aux_u, state):
    """Advance a killed reflected diffusion over one chunk of noise.

    ``state`` = [z, hazard, clock, t, killed, z_at_kill, b, s] is updated in
    place; returns the number of steps consumed.  For BM the gap is
    tracked through the driving path b and running maximum s.
    """
    sqdt = math.sqrt(dt)
    e = math.exp(-mu * dt)
    sd = math.sqrt((1.0 - e * e) / (2.0 * mu)) if is_ou else 0.0
    z = state[0]
    hz = state[1]
    clock = state[2]
    t = state[3]
    b = state[6]
    s = state[7]
    n = normals.shape[0]
    for k in range(n):
        if is_ou:
            z1 = abs(z * e + sd * normals[k])
        else:
            b1 = b + mu * dt + sqdt * normals[k]
            m = _bridge_max(b, b1, dt, aux_u[k])
            if m > s:
                s = m
            b = b1
            z1 = s - b
        inc = gamma * 0.5 * (z + z1) * dt
        if hz + inc >= clock:
            frac = (clock - hz) / inc
            state[0] = z1
            state[1] = hz + inc
            state[3] = t + frac * dt
            state[4] = 1.0
            state[5] = z1
            state[6] = b
            state[7] = s
            return k + 1
        hz += inc
        t += dt
        z = z1
    state[0] = z
    state[1] = hz
    state[3] = t
    state[6] = b
    state[7] = s
    return n


@njit(cache=True)
def bm_coupling(gamma, mu, x_hi, x_lo, dt, normals, aux_u, jump_u, out):
    """Two Brownian ratchets on the same driving path and Poisson points.

    The upper level's jump points are uniform on [b, s_hi]; a point below
    s_lo is shared by the lower ratchet, so both jump to it and coincide.
    Both levels also coincide once the bridge maximum exceeds s_hi.
    ``out`` = (time, coupled, dominance_ok, status).
    """
    n = normals.shape[0]
    sqdt = math.sqrt(dt)
    b = 0.0
    s_hi = x_hi
    s_lo = x_lo
    ju = 0
    clock = _exp_clock(jump_u[ju])
    ju += 1
    hz = 0.0
    gap = s_hi - b
    dom = True
    out[0] = n * dt
    out[1] = 0.0
    out[3] = OK
    if s_hi == s_lo:
        out[0] = 0.0
        out[1] = 1.0
        out[2] = 1.0
        return
    for k in range(n):
        b1 = b + mu * dt + sqdt * normals[k]
        m = _bridge_max(b, b1, dt, aux_u[k])
        if m >= s_hi:
            out[0] = (k + 1) * dt
            out[1] = 1.0
            break
        if m > s_lo:
            s_lo = m
        gap1 = s_hi - b1
        inc = gamma * 0.5 * (gap + gap1) * dt
        if gamma > 0.0 and hz + inc >= clock:
            frac = (clock - hz) / inc
            done = False
            while True:
                if ju + 2 > jump_u.shape[0]:
                    out[3] = OVERFLOW
                    done = True
                    break
                level = b1 + jump_u[ju] * gap1
                ju += 1
                if level <= s_lo:
                    out[0] = (k + frac) * dt
                    out[1] = 1.0
                    done = True
                    break
                s_hi = level
                gap1 = s_hi - b1
                clock = _exp_clock(jump_u[ju])
                ju += 1
                rate = gamma * gap1 * dt
                if rate * (1.0 - frac) < clock:
                    hz = rate * (1.0 - frac)
                    break
                frac += clock / rate
            if done:
                break
        else:
            hz += inc
        if s_hi < s_lo:
            dom = False
        b = b1
        gap = gap1
    out[2] = 1.0 if dom else 0.0


@njit(cache=True)
def ou_coupling(gamma, mu, x_hi, x_lo, dt, normals, aux_u, jump_u, out):
    """Two OU ratchet gaps driven by the same noise and Poisson points.

    Coupling happens when the upper gap touches 0 (the dominated lower gap
    is then at 0 as well) or when a jump point of the upper gap falls below
    the lower gap, which then jumps to the same point.  The lower gap is
    kept below the upper one, mirroring the order preservation of the
    synchronously driven reflected processes.
    ``out`` = (time, coupled, dominance_ok, status).
    """
    n = normals.shape[0]
    e = math.exp(-mu * dt)
    sd = math.sqrt((1.0 - e * e) / (2.0 * mu))
    hi = x_hi
    lo = x_lo
    ju = 0
    clock = _exp_clock(jump_u[ju])
    ju += 1
    hz = 0.0
    dom = True
    out[0] = n * dt
    out[1] = 0.0
    out[3] = OK
    if hi == lo:
        out[0] = 0.0
        out[1] = 1.0
        out[2] = 1.0
        return
    for k in range(n):
        wh = hi * e + sd * normals[k]
        wl = lo * e + sd * normals[k]
        hi1 = abs(wh)
        touched = wh <= 0.0
        if not touched:
            touched = aux_u[k] < _ou_cross_prob(hi, hi1, mu, dt)
        if touched:
            out[0] = (k + 1) * dt
            out[1] = 1.0
            break
        lo1 = abs(wl)
        if lo1 > hi1:
            lo1 = hi1
        inc = gamma * 0.5 * (hi + hi1) * dt
        if gamma > 0.0 and hz + inc >= clock:
            frac = (clock - hz) / inc
            done = False
            while True:
                if ju + 2 > jump_u.shape[0]:
                    out[3] = OVERFLOW
                    done = True
                    break
                level = jump_u[ju] * hi1
                ju += 1
                if level <= lo1:
                    out[0] = (k + frac) * dt
                    out[1] = 1.0
                    done = True
                    break
                hi1 = level
                clock = _exp_clock(jump_u[ju])
                ju += 1
                rate = gamma * hi1 * dt
                if rate * (1.0 - frac) < clock:
                    hz = rate * (1.0 - frac)
                    break
                frac += clock / rate
            if done:
                break
        else:
            hz += inc
        if hi1 < lo1:
            dom = False
        hi = hi1
        lo = lo1
    out[2] = 1.0 if dom else 0.0
