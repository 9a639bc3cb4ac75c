"""Independent reference computations used only by the tests.

These evaluate the balance equations of the service-process analysis
directly (truncated series, root bracketing, small linear solves) instead of
the closed forms, so an algebra slip in either route shows up as a mismatch.
"""
import math

import numpy as np
from scipy.optimize import brentq


def _truncation(ratio, eps=1e-18):
    return int(math.log(eps) / math.log(ratio)) + 10


# -- preemptive LCFS ----------------------------------------------------------

def lcfs_pre_root_numpy(lam, mu, p):
    roots = np.roots([lam, mu - lam, -mu * p])
    pos = [r.real for r in roots if abs(r.imag) < 1e-14 and r.real > 0]
    assert len(pos) == 1
    return pos[0]


def lcfs_pre_by_balance(lam, mu, p):
    """(p_tilde, s_tilde, t_tilde, P(Psi), E{S|Psi}, PAoI) from the balance equations."""
    a = lam / (lam + mu)
    b = mu / (lam + mu)
    h = 1.0 / (lam + mu)
    # p_tilde = b p + a [p_tilde + (1 - p_tilde) p_tilde]
    pt = brentq(lambda x: b * p + a * (x + (1 - x) * x) - x, 1e-300, 1.0, xtol=1e-16, rtol=1e-15)
    q = 1.0 - pt
    # (1-pt) s = b (1-p) h + a (1-pt)^2 (h + 2 s)
    s = (b * (1 - p) * h + a * q * q * h) / (q - 2 * a * q * q)
    # pt t = b p h + a [pt (h + t) + (1-pt) pt (h + s + t)]
    t = (b * p * h + a * (pt * h + q * pt * (h + s))) / (pt - a * pt - a * q * pt)
    # P = b p + a (1-pt) P
    prob = b * p / (1 - a * q)
    # P E = b p h + a (1-pt) P (h + s + E)
    e_s = (b * p * h + a * q * prob * (h + s)) / (prob - a * q * prob)
    y_hat = (1.0 / lam + pt * t + q * s) / pt
    return pt, s, t, prob, e_s, e_s + y_hat


# -- non-preemptive LCFS ------------------------------------------------------

def lcfs_non_by_balance(lam, mu, p):
    """(p_tilde, s_tilde, t_tilde, E{W|Psi}, E{Z|Psi}, PAoI) for rho < 1 via series."""
    a = lam / (lam + mu)
    b = mu / (lam + mu)
    h = 1.0 / (lam + mu)
    K = _truncation(a)
    ks = np.arange(1, K + 1, dtype=float)
    weight = b * a ** ks  # P(k arrivals during a service), k >= 1

    def pt_rhs(x):
        r = (1 - p) * (1 - x)  # < 1 since p > 0
        geo = (1 - r ** ks) / (1 - r)  # sum_{j<k} r^j
        return float(np.sum(weight * geo * (p + (1 - p) * x)))

    pt = brentq(lambda x: pt_rhs(x) - x, 1e-300, 1.0, xtol=1e-16, rtol=1e-15)
    r = (1 - p) * (1 - pt)

    # (1 - pt) s = b h + sum_k weight_k r^k ((k+1) h + k s)
    rk = r ** ks
    s = (b * h + np.sum(weight * rk * (ks + 1) * h)) / ((1 - pt) - np.sum(weight * rk * ks))

    # pt t = sum_k weight_k sum_{j<k} r^j [p((k+1)h + j s + 1/mu) + (1-p) pt ((k+1)h + j s + t)]
    const = 0.0
    coef_t = 0.0
    for k, w in zip(ks.astype(int), weight):
        j = np.arange(k, dtype=float)
        rj = r ** j
        base = (k + 1) * h + j * s
        const += w * np.sum(rj * (p * (base + 1.0 / mu) + (1 - p) * pt * base))
        coef_t += w * np.sum(rj) * (1 - p) * pt
    t = const / (pt - coef_t)

    rho = lam / mu
    n_states = _truncation(rho)
    # stationary M/M/1 occupancy seen by an arrival, reweighted by P(informative | occupancy)
    norm = (1 - rho) * p + sum((1 - rho) * rho ** k * (1 - pt) * p for k in range(1, n_states))
    p0 = (1 - rho) * p / norm
    pk = [(1 - rho) * rho ** k * (1 - pt) * p / norm for k in range(1, n_states)]

    wait = (1 - p0) * s

    shared = a * (h + pt * t + (1 - pt) * p * (s + 1 / mu) + (1 - pt) * (1 - p) * s)
    loop = a * (1 - pt) * (1 - p)
    z1 = (b * (h + 1 / lam + p / mu) + shared) / (1 - b * (1 - p) - loop)
    z = [z1]
    for _ in range(len(pk) - 1):
        z.append((b * (h + z[-1]) + shared) / (1 - loop))
    zhat = (p0 + pk[0]) * z[0] + sum(pk[i] * z[i] for i in range(1, len(pk)))
    return pt, s, t, wait, zhat, wait + zhat


# -- age process replay -------------------------------------------------------

def replay_age(events):
    """Rebuild the destination age process from an event log.

    Returns ``(peaks, drops)``: the value of the age just before every
    downward jump, and the value it jumps to.  The newest generation time held
    at the destination is a running maximum over delivered generation times,
    and age grows with slope one in between, so it is enough to evaluate the
    left and right limits at each delivery.
    """
    newest = None
    peaks, drops = [], []
    for e in events:
        if e.kind != "completion" or not e.delivered:
            continue
        if newest is None:
            newest = e.gen_time
            continue
        before = e.time - newest
        newest = max(newest, e.gen_time)
        after = e.time - newest
        if after < before:
            peaks.append(before)
            drops.append(after)
    return peaks, drops
