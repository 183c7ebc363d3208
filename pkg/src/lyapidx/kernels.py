"""Slot-level simulation loops.

Each kernel advances a simulation over one chunk of pre-drawn uniforms and
carries its state in small mutable arrays, so callers can stream arbitrarily
long horizons in bounded memory. All kernels are written in the numba
subset; with ``LYAPIDX_DISABLE_NUMBA=1`` they run as ordinary Python.

Float state layout (``fs``) and integer state layout (``ist``) are given by
the ``FS_*`` / ``IS_*`` constants below.
"""
import numpy as np

from ._jit import maybe_njit

# float state
FS_Q = 0           # virtual queue
FS_FRAME_POWER = 1  # power charged to the open frame (single-user)
FS_THR = 2         # cumulative (weighted) throughput
FS_POW = 3         # cumulative power
FS_QSUM = 4        # cumulative queue value
FS_QMAX = 5        # largest queue value seen
FS_EXCESS = 6      # max over t of cum_power(t) - beta * (t + 1)
FS_SIZE = 7

# integer state
IS_T = 0           # slots simulated so far
IS_FRAME_START = 1  # first slot of the open frame (single-user)
IS_F = 2           # file state (single-user)
IS_FRAMES = 3      # frames started
IS_SIZE = 4

# single-buffer policy codes
MAX_LAMBDA = 0
MIN_LAMBDA = 1
FIXED_PRIORITY = 2
RANDOM = 3
ROUND_ROBIN = 4
TOP_INDEX = 5  # highest queue position first; Max-lambda on ascending-sorted rates


@maybe_njit
def best_action(v, q, scale, lam, phi, power, n_act):
    """Argmax of (v*scale*phi - q*p) / (1 + phi/lam); ties go to the earliest slot."""
    best = 0
    best_val = (v * scale * phi[0] - q * power[0]) / (1.0 + phi[0] / lam)
    for j in range(1, n_act):
        val = (v * scale * phi[j] - q * power[j]) / (1.0 + phi[j] / lam)
        if val > best_val:
            best_val = val
            best = j
    return best, best_val


@maybe_njit
def single_user_chunk(phi, power, n_act, lam, scale, beta, v, u, fs, ist, thin, series):
    n = u.shape[0]
    for i in range(n):
        t = ist[IS_T]
        q = fs[FS_Q]
        fs[FS_QSUM] += q
        if ist[IS_F] == 1:
            j, _ = best_action(v, q, scale, lam, phi, power, n_act)
            p = power[j]
            ph = phi[j]
            fs[FS_THR] += scale * ph
            fs[FS_POW] += p
            ist[IS_FRAMES] += 1
            if u[i] < ph:
                ist[IS_F] = 0
                ist[IS_FRAME_START] = t
                fs[FS_FRAME_POWER] = p
            else:
                fs[FS_Q] = max(q + p - beta, 0.0)
        else:
            if u[i] < lam:
                ist[IS_F] = 1
                frame_len = t + 1 - ist[IS_FRAME_START]
                fs[FS_Q] = max(q + fs[FS_FRAME_POWER] - beta * frame_len, 0.0)
        if fs[FS_Q] > fs[FS_QMAX]:
            fs[FS_QMAX] = fs[FS_Q]
        excess = fs[FS_POW] - beta * (t + 1)
        if excess > fs[FS_EXCESS]:
            fs[FS_EXCESS] = excess
        ist[IS_T] = t + 1
        if thin > 0 and (t + 1) % thin == 0:
            r = (t + 1) // thin - 1
            if r < series.shape[0]:
                series[r, 0] = fs[FS_THR] / (t + 1)
                series[r, 1] = fs[FS_POW] / (t + 1)
                series[r, 2] = fs[FS_Q]


@maybe_njit
def multi_user_chunk(lam, scale, weight, n_act, phi, power, qhat, v, beta, m, packet_mode,
                     u, lengths, F, resid, fs, ist, served, thin, series):
    n_users = F.shape[0]
    gamma = np.zeros(n_users)
    arg = np.zeros(n_users, dtype=np.int64)
    sel = np.zeros(n_users, dtype=np.int64)
    ptr = np.zeros(n_users, dtype=np.int64)
    for i in range(u.shape[0]):
        t = ist[IS_T]
        q = fs[FS_Q]
        fs[FS_QSUM] += q
        for n in range(n_users):
            sel[n] = 0
            if F[n] == 1:
                j, g = best_action(v, q, scale[n], lam[n], phi[n], power[n], n_act[n])
                arg[n] = j
                gamma[n] = g
        for k in range(m):
            best = -1
            bg = 0.0
            for n in range(n_users):
                if F[n] == 1 and sel[n] == 0 and gamma[n] > bg:
                    best = n
                    bg = gamma[n]
            if best < 0:
                break
            sel[best] = 1
        slot_power = 0.0
        slot_thr = 0.0
        for n in range(n_users):
            x = u[i, n]
            if F[n] == 1:
                if sel[n] == 1:
                    j = arg[n]
                    slot_power += power[n, j]
                    served[n] += 1
                    if packet_mode:
                        if x < qhat[n, j]:
                            slot_thr += weight[n]
                            resid[n] -= 1
                            if resid[n] == 0:
                                F[n] = 0
                    else:
                        slot_thr += scale[n] * phi[n, j]
                        if x < phi[n, j]:
                            F[n] = 0
            elif x < lam[n]:
                F[n] = 1
                if packet_mode:
                    resid[n] = lengths[ptr[n], n]
                    ptr[n] += 1
        fs[FS_THR] += slot_thr
        fs[FS_POW] += slot_power
        fs[FS_Q] = max(q + slot_power - beta, 0.0)
        if fs[FS_Q] > fs[FS_QMAX]:
            fs[FS_QMAX] = fs[FS_Q]
        excess = fs[FS_POW] - beta * (t + 1)
        if excess > fs[FS_EXCESS]:
            fs[FS_EXCESS] = excess
        ist[IS_T] = t + 1
        if thin > 0 and (t + 1) % thin == 0:
            r = (t + 1) // thin - 1
            if r < series.shape[0]:
                series[r, 0] = fs[FS_THR] / (t + 1)
                series[r, 1] = fs[FS_POW] / (t + 1)
                series[r, 2] = fs[FS_Q]


@maybe_njit
def choose_served(F, lam, m, policy, prio, u_pol, offset, out):
    """Mark in ``out`` the min(m, #non-empty) queues a work-conserving policy serves.

    Each policy is a priority key per queue; the smallest keys win and ties
    go to the lower position (higher position for TOP_INDEX). Returns the
    number served.
    """
    n = F.shape[0]
    for k in range(n):
        out[k] = 0
    count = 0
    for _ in range(m):
        best = -1
        best_key = 0.0
        for k in range(n):
            if F[k] == 0 or out[k] == 1:
                continue
            if policy == MAX_LAMBDA:
                key = -lam[k]
            elif policy == MIN_LAMBDA:
                key = lam[k]
            elif policy == FIXED_PRIORITY:
                key = prio[k]
            elif policy == RANDOM:
                key = u_pol[k]
            elif policy == ROUND_ROBIN:
                key = (k - offset) % n
            else:
                key = -k
            if best < 0 or key < best_key:
                best = k
                best_key = key
        if best < 0:
            break
        out[best] = 1
        count += 1
    return count


@maybe_njit
def single_buffer_chunk(lam, m, policy, prio, u_arr, u_pol, F, ist, counts):
    """Serve, then accept Bernoulli arrivals into empty buffers. Returns packets served."""
    n = F.shape[0]
    out = np.zeros(n, dtype=np.int64)
    total = 0
    for i in range(u_arr.shape[0]):
        t = ist[IS_T]
        s = choose_served(F, lam, m, policy, prio, u_pol[i], t, out)
        total += s
        for k in range(n):
            if out[k] == 1:
                F[k] = 0
                counts[k] += 1
            if F[k] == 0 and u_arr[i, k] < lam[k]:
                F[k] = 1
        ist[IS_T] = t + 1
    return total


@maybe_njit
def _prefix_dominated(a, b):
    """True when every prefix sum of ``a`` is <= the matching prefix sum of ``b``."""
    sa = 0
    sb = 0
    for k in range(a.shape[0]):
        sa += a[k]
        sb += b[k]
        if sa > sb:
            return False
    return True


@maybe_njit
def coupled_chunk(lam, m, policy, prio, u_a, u_b, u_pol, Fpi, Flam, ist, a_lam_ones, tx):
    """Run policy ``policy`` and Max-lambda side by side on coupled arrivals.

    ``lam`` must be sorted ascending. Returns ``(slot, code)`` of the first
    violated check, or ``(-1, 0)``. Codes: 1 buffer prefix sums, 2 temporary
    prefix sums, 3 transmit counts, 4 empty-buffer position ordering.
    """
    n = lam.shape[0]
    out_pi = np.zeros(n, dtype=np.int64)
    out_lam = np.zeros(n, dtype=np.int64)
    tpi = np.zeros(n, dtype=np.int64)
    tlam = np.zeros(n, dtype=np.int64)
    jpi = np.zeros(n, dtype=np.int64)
    jlam = np.zeros(n, dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    alam = np.zeros(n, dtype=np.int64)
    for i in range(u_a.shape[0]):
        t = ist[IS_T]
        if not _prefix_dominated(Fpi, Flam):
            return t, 1
        s_pi = choose_served(Fpi, lam, m, policy, prio, u_pol[i], t, out_pi)
        s_lam = choose_served(Flam, lam, m, TOP_INDEX, prio, u_pol[i], t, out_lam)
        tx[0] += s_pi
        tx[1] += s_lam
        if s_pi > s_lam:
            return t, 3
        for k in range(n):
            tpi[k] = Fpi[k] - out_pi[k]
            tlam[k] = Flam[k] - out_lam[k]
        if not _prefix_dominated(tpi, tlam):
            return t, 2
        kpi = 0
        klam = 0
        for k in range(n):
            if tpi[k] == 0:
                jpi[kpi] = k
                kpi += 1
            if tlam[k] == 0:
                jlam[klam] = k
                klam += 1
        if kpi < klam:
            return t, 4
        for k in range(n):
            a[k] = 1 if u_a[i, k] < lam[k] else 0
            # queues whose temporary buffer is full under Max-lambda: independent draws
            alam[k] = 1 if u_b[i, k] < lam[k] else 0
        for l in range(klam):
            jp = jpi[l]
            jl = jlam[l]
            if jp > jl:
                return t, 4
            if a[jp] == 1:
                alam[jl] = 1
            else:
                alam[jl] = 1 if u_b[i, jl] < (lam[jl] - lam[jp]) / (1.0 - lam[jp]) else 0
        for k in range(n):
            a_lam_ones[k] += alam[k]
            Fpi[k] = 1 if (tpi[k] == 1 or a[k] == 1) else 0
            Flam[k] = 1 if (tlam[k] == 1 or alam[k] == 1) else 0
        ist[IS_T] = t + 1
    if not _prefix_dominated(Fpi, Flam):
        return ist[IS_T], 1
    return -1, 0
