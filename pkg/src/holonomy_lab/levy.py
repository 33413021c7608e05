"""Levy kernels of the parallel transport, Levy traces and the modified Levy Laplacian.

Three routes evaluate Delta_L^W U_{1,0}(gamma):

* ``closed_form``: co-integrated Yang-Mills and L_W-pairing terms;
* ``kernel_trace``: explicit kernels K^L, K^S on the grid, then the modified trace;
* ``fd_oracle``: kernels fitted to finite-difference second derivatives (flat charts).
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np

from . import _integrate as ig
from .algebra import dagger, index_trace
from .constants import DIM, LEVI_CIVITA, YANG_MILLS_SIGN
from .errors import IllConditionedFitError
from .gauge import covariant_derivative_from_jet, curvature
from .geometry import (
    DirectionField,
    FlatChart,
    PolyProfile,
    SineProfile,
    christoffel,
    levi_civita_transport,
    squeeze,
    stage_samples,
    truncate,
    two_form_norm,
)
from .transport import DEFAULT_OPTIONS, TransportOptions, _solve, _stage_cumulative, endpoint_transport

# ---------------------------------------------------------------------------
# helpers on so(4)-valued arrays (vectorized over leading axes)


def _hodge(a):
    return 0.5 * np.einsum("mnlk,...lk->...mn", LEVI_CIVITA, a)


def _hodge_block(B):
    return 0.5 * np.einsum("mnlk,...lkab->...mnab", LEVI_CIVITA, B)


def _pairing(a, B):
    """tr(a B) = sum a_mn B_nm with a of shape (..., 4, 4), B (..., 4, 4, N, N)."""
    return np.einsum("...mn,...nmab->...ab", a, B)


def _lw(W, ts):
    return np.asarray(W.log_derivative(ts), dtype=float)


# ---------------------------------------------------------------------------
# sampled path data


class PathSample:
    """Transport, frame, F and nabla F at the stage times of one curve.

    Shared by the kernel and closed-form routes so both see identical samples.
    """

    def __init__(self, A, chart, curve, options=None):
        options = options or DEFAULT_OPTIONS
        self.A, self.chart, self.curve, self.options = A, chart, curve, options
        self.grid = ig.make_grid(curve.pieces(), options.n)
        self.x, self.v = stage_samples(curve, self.grid)
        jet = A.jet(self.x, order=2)
        self.F, self.nablaF = covariant_derivative_from_jet(jet, christoffel(chart, self.x))
        M = np.einsum("...mab,...m->...ab", jet[0], self.v)
        self.transport = _solve(self.grid, M, options)
        self.frame = levi_civita_transport(chart, curve, grid=self.grid)
        Z = self.frame.stages
        # bold F: components in the transported orthonormal frame
        self.F_frame = np.einsum("...abij,...am,...bn->...mnij", self.F, Z, Z, optimize=True)
        self._kernels = None

    @property
    def U(self):
        return self.transport.stages

    @property
    def endpoint(self):
        return self.transport.endpoint

    def ym_contracted(self):
        """(D_A^* F)_n gamma'^n = -g^{ml} nabla_l F_mn gamma'^n at stages."""
        ginv = self.chart.inverse_metric(self.x)
        return -np.einsum("...ml,...lmnab,...n->...ab", ginv, self.nablaF, self.v, optimize=True)

    def length(self):
        speed = np.sqrt(np.einsum("...m,...mn,...n->...", self.v, self.chart.metric(self.x), self.v))
        return float(ig.simpson(speed, self.grid.h))

    def max_curvature(self):
        return float(np.max(two_form_norm(self.chart, self.x, self.F)))

    def scale(self):
        """L(gamma) * max_t |F(gamma(t))|, the reference size for vanishing tests."""
        return self.length() * self.max_curvature()

    def conjugate(self, X):
        """U_{1,t} X(t) U_{t,0} at stages; X may carry index axes before the gauge axes."""
        extra = X.ndim - self.U.ndim
        U = self.U.reshape(self.U.shape[:-2] + (1,) * extra + self.U.shape[-2:])
        return self.endpoint @ dagger(U) @ X @ U

    def cointegrate(self, X):
        return ig.cointegrate(self.transport.nodes, self.transport.M, X @ self.U, self.grid.h, self.options.scheme)

    def integrate(self, f):
        return ig.simpson(f, self.grid.h)


def _sample(A, chart, curve, options, sample):
    return sample if sample is not None else PathSample(A, chart, curve, options)


# ---------------------------------------------------------------------------
# kernels and traces


@dataclass
class KernelPair:
    """K^L (symmetric) and K^S (antisymmetric) at stage times, shape (n, 3, 4, 4, N, N)."""

    grid: ig.Grid
    levy: np.ndarray
    singular: np.ndarray

    def symmetry_defect(self):
        sym = np.max(np.abs(self.levy - np.swapaxes(self.levy, -3, -4)))
        anti = np.max(np.abs(self.singular + np.swapaxes(self.singular, -3, -4)))
        return float(sym), float(anti)


def second_derivative_kernels(A, chart, curve, options=None, sample=None):
    s = _sample(A, chart, curve, options, sample)
    if s._kernels is None:
        Z = s.frame.stages
        T = np.einsum("...labij,...lm,...an,...b->...mnij", s.nablaF, Z, Z, s.v, optimize=True)
        levy = s.conjugate(-0.5 * (T + np.swapaxes(T, -3, -4)))
        s._kernels = KernelPair(s.grid, levy, s.conjugate(s.F_frame))
    return s._kernels


def agv_levy_trace(K):
    return ig.simpson(index_trace(K.levy), K.grid.h)


def _trace_terms(K, W):
    lw = _lw(W, K.grid.stage_times)
    plus = 0.5 * (K.singular + _hodge_block(K.singular))
    left = -ig.simpson(_pairing(0.5 * (lw + _hodge(lw)), plus), K.grid.h)
    right = -ig.simpson(_pairing(0.5 * (lw - _hodge(lw)), K.singular - plus), K.grid.h)
    return agv_levy_trace(K), left, right


def modified_levy_trace(K, W):
    """int tr K^L - int tr(P_L(L_W) K^S_+) - int tr(P_R(L_W) K^S_-)."""
    return sum(_trace_terms(K, W))


# ---------------------------------------------------------------------------
# reports


def _matrix_json(m):
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


@dataclass
class LaplacianReport:
    route: str
    value: np.ndarray
    term_norms: dict
    scale: float
    quadrature: dict
    extras: dict = field(default_factory=dict)
    #: the three term matrices (yang_mills, left_pairing, right_pairing); not serialized
    terms: dict = field(default_factory=dict, repr=False)

    @property
    def norm(self):
        return float(np.linalg.norm(self.value))

    @property
    def rel_norm(self):
        return self.norm / self.scale if self.scale > 0 else self.norm

    def to_dict(self):
        out = {
            "route": self.route,
            "value": _matrix_json(self.value),
            "norm": self.norm,
            "term_norms": {k: float(v) for k, v in self.term_norms.items()},
            "quadrature": dict(self.quadrature),
            "scale": float(self.scale),
        }
        if self.extras:
            out["extras"] = {k: _plain(v) for k, v in self.extras.items()}
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _plain(v):
    if isinstance(v, np.ndarray):
        return _matrix_json(v) if np.iscomplexobj(v) else v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _report(route, terms, s, extras=None):
    names = ("yang_mills", "left_pairing", "right_pairing")
    return LaplacianReport(
        route,
        sum(terms),
        {k: float(np.linalg.norm(t)) for k, t in zip(names, terms)},
        s.scale(),
        {"n": s.grid.n, "scheme": s.options.scheme},
        extras or {},
        dict(zip(names, terms)),
    )


def laplacian_closed_form(A, chart, curve, W, options=None, sample=None):
    """YANG_MILLS_SIGN int U (D*F)(gamma') U dt - int U tr(L_W bold F) U dt, co-integrated."""
    s = _sample(A, chart, curve, options, sample)
    lw = _lw(W, s.grid.stage_times)
    plus = 0.5 * (s.F_frame + _hodge_block(s.F_frame))
    X = np.stack(
        [
            YANG_MILLS_SIGN * s.ym_contracted(),
            -_pairing(0.5 * (lw + _hodge(lw)), plus),
            -_pairing(0.5 * (lw - _hodge(lw)), s.F_frame - plus),
        ]
    )
    terms = s.cointegrate(X)
    return _report("closed_form", list(terms), s)


def laplacian_kernel_route(A, chart, curve, W, options=None, sample=None):
    s = _sample(A, chart, curve, options, sample)
    K = second_derivative_kernels(A, chart, curve, sample=s)
    return _report("kernel_trace", list(_trace_terms(K, W)), s)


# ---------------------------------------------------------------------------
# finite-difference oracle


def _legendre(t, degree):
    return np.polynomial.legendre.legvander(2.0 * np.asarray(t) - 1.0, degree)


def fd_directions(n_max=6, n_poly=2):
    profiles = [SineProfile(k) for k in range(1, n_max + 1)] + [PolyProfile(j) for j in range(n_poly)]
    return profiles


def volterra_form(sample, profiles):
    """Volterra part V[(a, mu), (b, nu)] of the second derivative on a flat chart."""
    s = sample
    ts = s.grid.stage_times
    U, Ud = s.U, dagger(s.U)
    g = Ud[..., None, :, :] @ np.einsum("...mnab,...n->...mab", s.F, s.v) @ U[..., None, :, :]  # (n, 3, 4, N, N)
    phi = np.stack([p.value(ts) for p in profiles])  # (P, n, 3)
    G = phi[:, None, ..., None, None] * np.moveaxis(g, -3, 0)[None]  # (P, 4, n, 3, N, N)
    G = G.reshape((-1,) + G.shape[2:])
    C = np.stack([_stage_cumulative(Gi, s.grid.h) for Gi in G])
    out = np.empty((G.shape[0], G.shape[0]) + U.shape[-2:], dtype=complex)
    for i in range(G.shape[0]):
        GC = G[i][None] @ C + G @ C[i][None]
        out[i] = s.endpoint @ _simpson_batch(GC, s.grid.h)
    return out


def _simpson_batch(f, h):
    """Simpson over axes (1, 2) of f with shape (B, n, 3, ...)."""
    w = (h[:, None] * np.array([1.0, 4.0, 1.0]) / 6.0)
    return np.einsum("kq,bkq...->b...", w, f)


def fd_second_derivatives(A, curve, profiles, options=None, eps=(2e-3, 1e-3), chunk=16):
    """Mixed central second differences of U_{1,0} for all direction pairs.

    Returns ``(D, residual)`` with ``D[(a, mu), (b, nu)]`` and the Richardson
    residual per pair.
    """
    options = options or DEFAULT_OPTIONS
    grid = ig.make_grid(curve.pieces(), options.n)
    x, v = stage_samples(curve, grid)
    ts = grid.stage_times
    phi = np.stack([p.value(ts) for p in profiles])
    dphi = np.stack([p.derivative(ts) for p in profiles])
    nd = len(profiles) * DIM
    pairs = [(i, j) for i in range(nd) for j in range(i, nd)]
    signs = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))

    def displacement(i, s1, j, s2, e):
        a, mu = divmod(i, DIM)
        b, nu = divmod(j, DIM)
        dx = np.zeros(x.shape)
        dv = np.zeros(v.shape)
        dx[..., mu] += e * s1 * phi[a]
        dv[..., mu] += e * s1 * dphi[a]
        dx[..., nu] += e * s2 * phi[b]
        dv[..., nu] += e * s2 * dphi[b]
        return x + dx, v + dv

    D = np.empty((nd, nd, A.N, A.N), dtype=complex)
    resid = np.zeros((nd, nd))
    per = 4 * len(eps)
    step = max(1, chunk // per)
    for k in range(0, len(pairs), step):
        block = pairs[k : k + step]
        xs, vs = [], []
        for i, j in block:
            for e in eps:
                for s1, s2, _ in signs:
                    xx, vv = displacement(i, s1, j, s2, e)
                    xs.append(xx)
                    vs.append(vv)
        U = endpoint_transport(A, np.array(xs), np.array(vs), grid.h, options.scheme, chunk=chunk)
        U = U.reshape(len(block), len(eps), 4, *U.shape[-2:])
        w = np.array([s[2] for s in signs], dtype=float)
        est = np.einsum("s,pesab->peab", w, U) / (4.0 * np.array(eps) ** 2)[None, :, None, None]
        c = (eps[0] / eps[1]) ** 2 - 1.0
        val = est[:, 1] + (est[:, 1] - est[:, 0]) / c
        for (i, j), vij, e0, e1 in zip(block, val, est[:, 0], est[:, 1]):
            D[i, j] = D[j, i] = vij
            resid[i, j] = resid[j, i] = np.linalg.norm(vij - e1)
    return D, resid


@dataclass
class KernelFit:
    degree: int
    levy_coef: np.ndarray  # (4, 4, degree+1, N, N)
    singular_coef: np.ndarray
    condition: tuple

    def levy(self, t):
        return np.einsum("tp,mnpab->tmnab", _legendre(t, self.degree), self.levy_coef)

    def singular(self, t):
        return np.einsum("tp,mnpab->tmnab", _legendre(t, self.degree), self.singular_coef)


def fit_kernels(local, profiles, degree=9, cond_max=1e8, n_quad=200):
    """Least-squares Legendre fit of K^L, K^S to local bilinear-form data.

    ``local[(a, mu), (b, nu)]`` = int K^L_mn phi_a phi_b + 1/2 int K^S_mn (phi_a' phi_b - phi_a phi_b').
    """
    tq, wq = np.polynomial.legendre.leggauss(n_quad)
    tq, wq = 0.5 * (tq + 1.0), 0.5 * wq
    L = _legendre(tq, degree)
    phi = np.stack([p.value(tq) for p in profiles])
    dphi = np.stack([p.derivative(tq) for p in profiles])
    P = len(profiles)
    sym_rows = [(a, b) for a in range(P) for b in range(a, P)]
    anti_rows = [(a, b) for a in range(P) for b in range(a + 1, P)]
    S = np.array([(wq * phi[a] * phi[b]) @ L for a, b in sym_rows])
    Aq = np.array([(0.5 * wq * (dphi[a] * phi[b] - phi[a] * dphi[b])) @ L for a, b in anti_rows])
    # fewer probe pairs than coefficients leaves the fit underdetermined
    cond = tuple(float(np.linalg.cond(M)) if M.shape[0] >= M.shape[1] else np.inf for M in (S, Aq))
    if max(cond) > cond_max:
        raise IllConditionedFitError(f"kernel fit condition numbers {cond[0]:.2e}, {cond[1]:.2e} exceed {cond_max:.0e}")
    N = local.shape[-1]
    loc = local.reshape(P, DIM, P, DIM, N, N)
    levy = np.zeros((DIM, DIM, degree + 1, N, N), dtype=complex)
    sing = np.zeros_like(levy)
    for m in range(DIM):
        for n in range(m, DIM):
            sym = np.array([0.5 * (loc[a, m, b, n] + loc[b, m, a, n]) for a, b in sym_rows])
            c = np.linalg.lstsq(S, sym.reshape(len(sym_rows), -1), rcond=None)[0].reshape(-1, N, N)
            levy[m, n] = levy[n, m] = c
            if m != n:
                anti = np.array([0.5 * (loc[a, m, b, n] - loc[b, m, a, n]) for a, b in anti_rows])
                c = np.linalg.lstsq(Aq, anti.reshape(len(anti_rows), -1), rcond=None)[0].reshape(-1, N, N)
                sing[m, n], sing[n, m] = c, -c
    return KernelFit(degree, levy, sing, cond)


FD_OPTIONS = TransportOptions(n=200)


def laplacian_fd_route(
    A, curve, W, n_max=6, options=None, degree=11, n_poly=2, eps=(2e-3, 1e-3), cond_max=1e8, sample=None, chart=None
):
    """Modified Levy Laplacian from kernels fitted to FD second derivatives (flat chart).

    Every direction pair of the family (sin(k pi t), k <= n_max, and
    t^{j+1}(1 - t), j < n_poly, times the four axes) gets a mixed central
    second difference of U_{1,0}.  The analytic Volterra part is subtracted and
    K^L, K^S are fitted by Legendre polynomials of ``degree``.  All probes vanish
    at both ends, so kernel values near t = 0, 1 are fixed only by smoothness;
    the interior residual is reported.  The default grid is coarser
    (``FD_OPTIONS``): the differences see the discrete transport consistently.
    """
    chart = chart or FlatChart()
    if not getattr(chart, "is_flat", False):
        raise ValueError("the finite-difference route is defined on flat charts only")
    s = _sample(A, chart, curve, options or FD_OPTIONS, sample)
    profiles = fd_directions(n_max, n_poly)
    D, resid = fd_second_derivatives(A, curve, profiles, s.options, eps)
    local = D - volterra_form(s, profiles)
    fit = fit_kernels(local, profiles, degree, cond_max)
    tq, wq = np.polynomial.legendre.leggauss(64)
    tq, wq = 0.5 * (tq + 1.0), 0.5 * wq
    KL, KS = fit.levy(tq), fit.singular(tq)
    lw = _lw(W, tq)
    plus = 0.5 * (KS + _hodge_block(KS))
    terms = [
        np.einsum("t,tab->ab", wq, index_trace(KL)),
        -np.einsum("t,tab->ab", wq, _pairing(0.5 * (lw + _hodge(lw)), plus)),
        -np.einsum("t,tab->ab", wq, _pairing(0.5 * (lw - _hodge(lw)), KS - plus)),
    ]
    # fitted-vs-analytic kernel residual on interior Gauss nodes of the transport grid
    K = second_derivative_kernels(A, chart, curve, sample=s)
    mids = s.grid.stage_times[:, 1]
    pick = (mids > 0.15) & (mids < 0.85)
    ref_L, ref_S = K.levy[pick, 1], K.singular[pick, 1]
    kscale = max(np.max(np.abs(ref_L)), np.max(np.abs(ref_S)), 1e-300)
    extras = {
        "noise_floor": float(np.max(resid)),
        "levy_kernel_residual": float(np.max(np.abs(fit.levy(mids[pick]) - ref_L)) / kscale),
        "singular_kernel_residual": float(np.max(np.abs(fit.singular(mids[pick]) - ref_S)) / kscale),
        "condition": list(fit.condition),
        "n_max": n_max,
        "degree": degree,
    }
    return _report("fd_oracle", terms, s, extras)


ROUTES = {"closed_form": laplacian_closed_form, "kernel_trace": laplacian_kernel_route, "fd_oracle": laplacian_fd_route}


def laplacian(A, chart, curve, W, route="closed_form", options=None, sample=None):
    if route == "fd_oracle":
        return laplacian_fd_route(A, curve, W, options=options, sample=sample, chart=chart)
    return ROUTES[route](A, chart, curve, W, options, sample)


# ---------------------------------------------------------------------------
# integral functionals L_f(gamma) = int f(gamma(t)) dt


class ScalarField:
    """f with gradient and Hessian; subclasses override the analytic pieces."""

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError


class SquaredNorm(ScalarField):
    """|x - c|^2 in chart coordinates."""

    def __init__(self, center=(0.0, 0.0, 0.0, 0.0)):
        self.center = np.asarray(center, dtype=float)

    def value(self, x):
        y = np.asarray(x) - self.center
        return np.sum(y * y, axis=-1)

    def gradient(self, x):
        return 2.0 * (np.asarray(x) - self.center)

    def hessian(self, x):
        x = np.asarray(x)
        return np.broadcast_to(2.0 * np.eye(DIM), x.shape[:-1] + (DIM, DIM))


class CoordinateFunction(ScalarField):
    def __init__(self, index):
        self.index = index

    def value(self, x):
        return np.asarray(x)[..., self.index]

    def gradient(self, x):
        x = np.asarray(x)
        g = np.zeros(x.shape)
        g[..., self.index] = 1.0
        return g

    def hessian(self, x):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + (DIM, DIM))


class ConstantFunction(ScalarField):
    def __init__(self, c=1.0):
        self.c = float(c)

    def value(self, x):
        return np.full(np.asarray(x).shape[:-1], self.c)

    def gradient(self, x):
        return np.zeros(np.asarray(x).shape)

    def hessian(self, x):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + (DIM, DIM))


def covariant_hessian(f, chart, x):
    """nabla^2 f_ij = d_i d_j f - Gamma^k_ij d_k f."""
    return f.hessian(x) - np.einsum("...kij,...k->...ij", christoffel(chart, x), f.gradient(x))


def laplace_beltrami(f, chart, x):
    return np.einsum("...ij,...ij->...", chart.inverse_metric(x), covariant_hessian(f, chart, x))


def integral_functional_laplacian(f, chart, curve, n=2000):
    """Levy Laplacian of L_f by the direct Laplace-Beltrami integral and by the frame-Hessian kernel."""
    grid = ig.make_grid(curve.pieces(), n)
    x, _ = stage_samples(curve, grid)
    direct = float(ig.simpson(laplace_beltrami(f, chart, x), grid.h))
    Z = levi_civita_transport(chart, curve, grid=grid).stages
    kernel = np.einsum("...ij,...im,...jn->...mn", covariant_hessian(f, chart, x), Z, Z)
    via_kernel = float(ig.simpson(np.einsum("...mm->...", kernel), grid.h))
    return {"direct": direct, "kernel": via_kernel, "discrepancy": abs(direct - via_kernel)}


# ---------------------------------------------------------------------------
# lemma diagnostics


def diagnostic_J(A, chart, curve, W, r_grid=None, options=None, step=1e-2):
    """J(r) = U_{1,r}(gamma) Delta^W U_{1,0}(gamma^r) and a one-sided FD estimate of J'(1).

    J'(1) uses the second-order backward stencil at ``step`` and ``step/2``
    with one Richardson level; the reference value is
    YANG_MILLS_SIGN * (D_A^* F)(gamma(1)) gamma'(1) U_{1,0}(gamma).
    """
    options = options or DEFAULT_OPTIONS
    full = PathSample(A, chart, curve, options)
    U1 = full.endpoint

    @functools.lru_cache(maxsize=None)
    def J(r):
        s = PathSample(A, chart, truncate(curve, r), options)
        return U1 @ dagger(s.endpoint) @ laplacian_closed_form(A, chart, None, W, sample=s).value

    r_grid = np.linspace(0.1, 1.0, 10) if r_grid is None else np.asarray(r_grid, dtype=float)
    values = np.array([J(float(r)) for r in r_grid])

    def backward(hh):
        return (3.0 * J(1.0) - 4.0 * J(1.0 - hh) + J(1.0 - 2.0 * hh)) / (2.0 * hh)

    d1, d2 = backward(step), backward(step / 2)
    deriv = d2 + (d2 - d1) / 3.0
    ym_end = full.ym_contracted()[-1, -1]
    expected = YANG_MILLS_SIGN * ym_end @ U1
    ref = float(np.linalg.norm(expected))
    err = float(np.linalg.norm(deriv - expected))
    return {
        "r": r_grid,
        "J": values,
        "J_norms": np.linalg.norm(values, axis=(-2, -1)),
        "scale": full.scale(),
        "J_prime_1": deriv,
        "expected_J_prime_1": expected,
        "identity_residual": err,
        "relative_residual": err / ref if ref > 0 else err,
        "ym_norm_end": float(np.linalg.norm(full.ym_contracted()[-1, -1])),
    }


def pointwise_trace_recovery(A, chart, curve, a, r, eps_schedule=(0.2, 0.1, 0.05, 0.025), options=None):
    """Recover tr(a bold F(gamma(r))) from Laplacians on squeeze curves gamma_{r, eps}.

    E(eps) = -Delta^W U_{1,0}(gamma_{r,eps}) U_{r,0}(gamma)^{-1} with W = exp(t a);
    E is extrapolated linearly to eps = 0.
    """
    from .algebra import RotationPath

    W = RotationPath(a)
    eps = np.asarray(eps_schedule, dtype=float)
    E = []
    scale = None
    for e in eps:
        s = PathSample(A, chart, squeeze(curve, r, e), options)
        E.append(-laplacian_closed_form(A, chart, None, W, sample=s).value @ dagger(s.endpoint))
        if scale is None:
            Z = s.frame.nodes[-1]
            Fr = curvature(A, curve.position(float(r)))
            target = _pairing(W.generator.matrix, np.einsum("abij,am,bn->mnij", Fr, Z, Z))
            scale = s.scale()
    E = np.array(E)
    design = np.stack([np.ones_like(eps), eps], axis=1)
    coef = np.linalg.lstsq(design, E.reshape(len(eps), -1), rcond=None)[0]
    limit = coef[0].reshape(E.shape[1:])
    errors = np.linalg.norm(E - target, axis=(-2, -1))
    floor = 1e-12 * max(1.0, float(np.linalg.norm(target)))
    if np.all(errors > floor):
        exponent = float(np.polyfit(np.log(eps), np.log(errors), 1)[0])
    else:
        exponent = float("nan")
    return {
        "eps": eps,
        "values": E,
        "limit": limit,
        "target": target,
        "errors": errors,
        "limit_error": float(np.linalg.norm(limit - target)),
        "rate_exponent": exponent,
        "scale": scale,
    }


def directions_basis(n_max=6, n_poly=2):
    """All FD directions as DirectionField objects, ordered (profile, axis)."""
    return [DirectionField.single(p, m) for p in fd_directions(n_max, n_poly) for m in range(DIM)]
