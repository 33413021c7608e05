"""Parallel transport along curves and its first/second directional derivatives."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _integrate as ig
from .algebra import dagger, unitarity_defect
from .errors import NoiseFloorWarning
from .gauge import curvature_from_jet
from .geometry import ReparametrizedCurve, levi_civita_transport, stage_samples


@dataclass(frozen=True)
class TransportOptions:
    n: int = 2000
    scheme: str = "rk4"
    reproject_every: int = 50
    drift_tol: float = 1e-6

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("TransportOptions.n must be >= 2")
        if self.reproject_every < 1:
            raise ValueError("TransportOptions.reproject_every must be >= 1")
        if self.scheme not in ("rk4", "magnus2"):
            raise ValueError(f"unknown scheme {self.scheme!r}; expected 'rk4' or 'magnus2'")


DEFAULT_OPTIONS = TransportOptions()


def generator_samples(A, x, v):
    """M = A_mu(x) v^mu at stage samples."""
    return np.einsum("...mab,...m->...ab", A(x), v)


class TransportResult:
    """U_{t,0} on a grid; ``U(t, s)`` = U_{t,0} U_{s,0}^{-1} for grid nodes s, t."""

    def __init__(self, grid, nodes, stages, M, options):
        self.grid, self.nodes, self.stages, self.M = grid, nodes, stages, M
        self.options = options

    @property
    def N(self):
        return self.nodes.shape[-1]

    @property
    def endpoint(self):
        return self.nodes[-1]

    def U(self, t, s=0.0):
        i, j = self.grid.index_of(t), self.grid.index_of(s)
        if i == j:
            return np.eye(self.N, dtype=complex)
        return self.nodes[i] @ dagger(self.nodes[j])

    def unitarity_defect(self):
        return unitarity_defect(self.nodes)

    def __repr__(self):
        return f"TransportResult(n={self.grid.n}, N={self.N})"


def parallel_transport(A, curve, options=None, grid=None):
    """Solve dU/dt = -A_mu(gamma) gamma'^mu U with U(0) = I."""
    options = options or DEFAULT_OPTIONS
    grid = grid or ig.make_grid(curve.pieces(), options.n)
    x, v = stage_samples(curve, grid)
    M = generator_samples(A, x, v)
    return _solve(grid, M, options)


def _solve(grid, M, options, start=0):
    P = ig.propagators(M[start:], grid.h[start:], options.scheme)
    nodes = ig.accumulate(P, None, options.reproject_every, options.drift_tol)
    return TransportResult(grid, nodes, ig.stage_values(nodes, M[start:], grid.h[start:]), M, options)


def transport_between(A, curve, s, t, options=None, grid=None):
    """U_{t,s} from a fresh solve started at node s (not via U_{t,0} U_{s,0}^{-1})."""
    options = options or DEFAULT_OPTIONS
    grid = grid or ig.make_grid(curve.pieces(), options.n)
    i, j = grid.index_of(s), grid.index_of(t)
    if j < i:
        return dagger(transport_between(A, curve, t, s, options, grid))
    if i == j:
        return np.eye(A.N, dtype=complex)
    sub = ig.Grid(grid.nodes[i : j + 1])
    x, v = stage_samples(curve, sub)
    P = ig.propagators(generator_samples(A, x, v), sub.h, options.scheme)
    return ig.accumulate(P, None, options.reproject_every, options.drift_tol)[-1]


def endpoint_transport(A, x, v, h, scheme="rk4", chunk=16):
    """U_{1,0} for a batch of sampled curves ``x, v`` of shape (B, n, 3, 4).

    Uses a pairwise product of the one-step maps, no reprojection.
    """
    out = []
    for k in range(0, x.shape[0], chunk):
        M = generator_samples(A, x[k : k + chunk], v[k : k + chunk])
        out.append(ig.tree_product(ig.propagators(M, h, scheme)))
    return np.concatenate(out, axis=0)


def _pair(F, u, w):
    """F<u, w> = F_mn u^m w^n, entrywise in gauge indices."""
    return np.einsum("...mnab,...m,...n->...ab", F, u, w)


def frame_lift(frame_stages, hv):
    """h~ = Z_mu h^mu at stages: frame (n, 3, 4, 4), h (n, 3, 4)."""
    return np.einsum("...am,...m->...a", frame_stages, hv)


def first_derivative(A, chart, curve, h, options=None, transport=None, frame=None):
    """d_h~ U_{1,0} = -int U_{1,t} F<h~, gamma'> U_{t,0} dt, by co-integration."""
    options = options or DEFAULT_OPTIONS
    if transport is None:
        transport = parallel_transport(A, curve, options)
    grid = transport.grid
    if frame is None:
        frame = levi_civita_transport(chart, curve, grid=grid)
    x, v = stage_samples(curve, grid)
    F = curvature_from_jet(A.jet(x, order=1))[0]
    X = _pair(F, frame_lift(frame.stages, h.value(grid.stage_times)), v)
    return -ig.cointegrate(transport.nodes, transport.M, X @ transport.stages, grid.h, options.scheme)


def second_derivative_form(A, curve, h1, h2, options=None, transport=None):
    """<D^2 U_{1,0} h1, h2> on a flat chart (frame = identity, h~ = h).

    Volterra part U_{1,0} int (G1 C2 + G2 C1) dt with G_i = U_{t,0}^{-1} F<h_i, gamma'> U_{t,0}
    and C_i its running integral, plus the local part
    -int U_{1,t} (nabla_{h2} F<h1, gamma'> + F<h1, h2'>) U_{t,0} dt.
    """
    options = options or DEFAULT_OPTIONS
    if transport is None:
        transport = parallel_transport(A, curve, options)
    grid = transport.grid
    ts = grid.stage_times
    x, v = stage_samples(curve, grid)
    jet = A.jet(x, order=2)
    F, dF = curvature_from_jet(jet)
    nablaF = dF + _comm(jet[0][..., :, None, None, :, :], F[..., None, :, :, :, :])
    a1, a2, d2 = h1.value(ts), h2.value(ts), h2.derivative(ts)
    U, Ud = transport.stages, dagger(transport.stages)
    G1 = Ud @ _pair(F, a1, v) @ U
    G2 = Ud @ _pair(F, a2, v) @ U
    C1 = _stage_cumulative(G1, grid.h)
    C2 = _stage_cumulative(G2, grid.h)
    volterra = transport.endpoint @ ig.simpson(G1 @ C2 + G2 @ C1, grid.h)
    local = np.einsum("...lmnab,...l,...m,...n->...ab", nablaF, a2, a1, v) + _pair(F, a1, d2)
    return volterra - ig.cointegrate(transport.nodes, transport.M, local @ U, grid.h, options.scheme)


def _comm(a, b):
    return a @ b - b @ a


def _stage_cumulative(f, h):
    nodes, mids = ig.cumulative_simpson(f, h)
    return np.stack([nodes[:-1], mids, nodes[1:]], axis=1)


def _richardson(d1, d2, ratio, power=2):
    """Combine estimates at steps e and e/ratio; returns (value, residual)."""
    c = ratio**power - 1.0
    value = d2 + (d2 - d1) / c
    return value, float(np.linalg.norm(value - d2))


def fd_directional_derivative(A, curve, h1, order=1, h2=None, eps=None, tol=None, options=None):
    """Finite-difference oracle for directional derivatives of U_{1,0} (flat chart).

    The curve is perturbed by chart-level addition gamma + e h.  ``eps`` holds
    two step sizes; one Richardson level is applied.  Returns
    ``(value, residual)`` where ``residual`` is |extrapolated - finer estimate|.
    """
    options = options or DEFAULT_OPTIONS
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if eps is None:
        eps = (1e-3, 5e-4) if order == 1 else (2e-3, 1e-3)
    h2 = h1 if h2 is None else h2
    grid = ig.make_grid(curve.pieces(), options.n)
    x, v = stage_samples(curve, grid)
    ts = grid.stage_times
    p1, q1 = h1.value(ts), h1.derivative(ts)
    p2, q2 = h2.value(ts), h2.derivative(ts)
    if order == 1:
        signs = [(s, 0.0) for s in (1.0, -1.0)]
        weights = np.array([1.0, -1.0])
    else:
        signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        weights = np.array([1.0, -1.0, -1.0, 1.0])
    xs, vs = [], []
    for e in eps:
        for s1, s2 in signs:
            xs.append(x + e * (s1 * p1 + s2 * p2))
            vs.append(v + e * (s1 * q1 + s2 * q2))
    U = endpoint_transport(A, np.array(xs), np.array(vs), grid.h, options.scheme)
    U = U.reshape(len(eps), len(signs), *U.shape[-2:])
    denom = np.array([2 * e if order == 1 else 4 * e * e for e in eps])
    est = np.einsum("s,esab->eab", weights, U) / denom[:, None, None]
    value, resid = _richardson(est[0], est[1], eps[0] / eps[1])
    if tol is not None and resid > tol:
        warnings.warn(f"Richardson residual {resid:.2e} exceeds requested {tol:.1e}", NoiseFloorWarning)
    return value, resid


def reparametrize_check(A, curve, sigma, options=None):
    """Frobenius distance between U_{1,0}(gamma o sigma) and U_{1,0}(gamma)."""
    base = parallel_transport(A, curve, options).endpoint
    other = parallel_transport(A, ReparametrizedCurve(curve, sigma), options).endpoint
    return {"discrepancy": float(np.linalg.norm(other - base)), "U": base, "U_reparametrized": other}
