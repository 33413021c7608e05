"""Linear matrix ODE machinery shared by gauge and frame transport.

All solvers treat ``Y' = -M(t) Y`` with ``M`` sampled at the three RK4 stage
times of every step: arrays of shape ``(..., n, 3, d, d)`` holding
(start, midpoint, end) values.  Start and end samples are taken one ulp inside
the step, so a velocity jump at a node is seen from the correct side.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import TransportError


class Grid:
    """Piecewise-uniform grid on [0, 1] with nodes at every curve breakpoint."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        self.nodes = nodes
        self.h = np.diff(nodes)
        a, b = nodes[:-1], nodes[1:]
        self.stage_times = np.stack(
            [np.nextafter(a, b), 0.5 * (a + b), np.nextafter(b, a)], axis=-1
        )

    @property
    def n(self):
        return self.h.size

    def index_of(self, t, tol=1e-12):
        i = int(np.argmin(np.abs(self.nodes - t)))
        if abs(self.nodes[i] - t) > tol:
            raise ValueError(f"t={t} is not a grid node")
        return i

    def __repr__(self):
        return f"Grid(n={self.n})"


def make_grid(pieces, n):
    """Distribute about ``n`` steps over ``pieces = [(a, b, static), ...]``.

    Static pieces (zero velocity) get a single step; the rest share the budget
    in proportion to their length, with at least two steps each.
    """
    moving = [(a, b) for a, b, static in pieces if not static and b > a]
    total = sum(b - a for a, b in moving) or 1.0
    budget = max(n - sum(1 for a, b, s in pieces if s and b > a), 2 * max(len(moving), 1))
    nodes = [pieces[0][0]]
    for a, b, static in pieces:
        if b <= a:
            continue
        k = 1 if static else max(2, int(round(budget * (b - a) / total)))
        nodes.extend(np.linspace(a, b, k + 1)[1:])
    return Grid(np.array(nodes))


def rk4_propagators(M, h):
    """One-step maps P_k with Y_{k+1} = P_k Y_k for classical RK4."""
    h = h[:, None, None]
    m0, mm, m1 = M[..., 0, :, :], M[..., 1, :, :], M[..., 2, :, :]
    eye = np.eye(M.shape[-1])
    k1 = -m0
    k2 = -mm + 0.5 * h * (mm @ m0)
    k3 = -mm - 0.5 * h * (mm @ k2)
    k4 = -m1 - h * (m1 @ k3)
    return eye + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def magnus2_propagators(M, h):
    """Exponential midpoint rule exp(-h M_mid); exactly unitary for skew M."""
    return scipy.linalg.expm(-h[:, None, None] * M[..., 1, :, :])


def propagators(M, h, scheme="rk4"):
    if scheme == "rk4":
        return rk4_propagators(M, h)
    if scheme == "magnus2":
        return magnus2_propagators(M, h)
    raise ValueError(f"unknown scheme {scheme!r}; expected 'rk4' or 'magnus2'")


def accumulate(P, Y0=None, reproject_every=None, drift_tol=1e-6):
    """Node values Y_0..Y_n from one-step maps, optionally re-unitarizing.

    Re-unitarization uses the polar factor every ``reproject_every`` steps and
    raises :class:`TransportError` when the defect accumulated since the last
    projection exceeds ``drift_tol``.
    """
    n = P.shape[-3]
    d = P.shape[-1]
    Y = np.empty(P.shape[:-3] + (n + 1, d, d), dtype=np.result_type(P, complex if np.iscomplexobj(P) else float))
    Y[..., 0, :, :] = np.eye(d) if Y0 is None else Y0
    eye = np.eye(d)
    for k in range(n):
        y = P[..., k, :, :] @ Y[..., k, :, :]
        if reproject_every and (k + 1) % reproject_every == 0:
            y = _polar(y, eye, drift_tol)
        Y[..., k + 1, :, :] = y
    if reproject_every and n % reproject_every:
        Y[..., n, :, :] = _polar(Y[..., n, :, :], eye, drift_tol)
    return Y


def _polar(y, eye, drift_tol):
    defect = np.max(np.linalg.norm(np.conj(np.swapaxes(y, -1, -2)) @ y - eye, axis=(-2, -1)))
    if defect > drift_tol:
        raise TransportError(f"unitarity drift {defect:.3e} exceeds {drift_tol:.1e}")
    u, _, vh = np.linalg.svd(y)
    return u @ vh


def tree_product(P):
    """P_{n-1} ... P_1 P_0 by pairwise reduction."""
    while P.shape[-3] > 1:
        m = P.shape[-3]
        paired = P[..., 1 : m - m % 2 : 2, :, :] @ P[..., 0 : m - m % 2 : 2, :, :]
        if m % 2:
            paired = np.concatenate([paired, P[..., m - 1 :, :, :]], axis=-3)
        P = paired
    return P[..., 0, :, :]


def stage_values(Y, M, h):
    """Y at the stage times: node values plus cubic-Hermite midpoints."""
    y0, y1 = Y[..., :-1, :, :], Y[..., 1:, :, :]
    d0 = -M[..., 0, :, :] @ y0
    d1 = -M[..., 2, :, :] @ y1
    mid = 0.5 * (y0 + y1) + (h[:, None, None] / 8.0) * (d0 - d1)
    return np.stack([y0, mid, y1], axis=-3)


def rk4_forcing(M, X, h):
    """Zero-state response Q_k of one RK4 step of V' = -M V + X."""
    h = h[:, None, None]
    m0, mm, m1 = M[..., 0, :, :], M[..., 1, :, :], M[..., 2, :, :]
    x0, xm, x1 = X[..., 0, :, :], X[..., 1, :, :], X[..., 2, :, :]
    k1 = x0
    k2 = xm - 0.5 * h * (mm @ k1)
    k3 = xm - 0.5 * h * (mm @ k2)
    k4 = x1 - h * (m1 @ k3)
    return h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def magnus2_forcing(M, X, h):
    half = scipy.linalg.expm(-0.5 * h[:, None, None] * M[..., 1, :, :])
    return h[:, None, None] * (half @ X[..., 1, :, :])


def cointegrate(Y, M, X, h, scheme="rk4"):
    """int_0^1 Y_{1,t} X(t) Y_{t,0} dt via the augmented state V' = -M V + X.

    ``Y`` holds node values of the homogeneous solution; ``X`` has stage
    samples ``(..., n, 3, d, d)`` and may carry extra leading axes.  The
    recursion V_{k+1} = P_k V_k + Q_k telescopes to Y_n sum_k Y_{k+1}^{-1} Q_k.
    """
    Q = rk4_forcing(M, X, h) if scheme == "rk4" else magnus2_forcing(M, X, h)
    inv = np.linalg.inv(Y[..., 1:, :, :])
    return Y[..., -1, :, :] @ np.sum(inv @ Q, axis=-3)


def simpson(f, h):
    """Composite Simpson over stage samples ``f`` of shape (n, 3, ...)."""
    w = np.array([1.0, 4.0, 1.0]) / 6.0
    return np.tensordot(h[:, None] * w, f, axes=([0, 1], [0, 1]))


def cumulative_simpson(f, h):
    """Running integrals at nodes (n+1) and midpoints (n) from stage samples."""
    steps = (h / 6.0)[(...,) + (None,) * (f.ndim - 2)] * (f[:, 0] + 4 * f[:, 1] + f[:, 2])
    nodes = np.concatenate([np.zeros((1,) + f.shape[2:], dtype=f.dtype), np.cumsum(steps, axis=0)])
    # quadratic through the three samples, integrated over the first half step
    half = (h / 24.0)[(...,) + (None,) * (f.ndim - 2)] * (5 * f[:, 0] + 8 * f[:, 1] - f[:, 2])
    return nodes, nodes[:-1] + half
