"""Connection fields, curvature and its covariant derivatives, gauge transforms.

A connection supplies its jet at chart points ``x`` of shape ``B + (4,)``::

    A    B + (4, N, N)          A[mu]
    dA   B + (4, 4, N, N)       dA[lam, mu]      = d_lam A_mu
    d2A  B + (4, 4, 4, N, N)    d2A[kap, lam, mu] = d_kap d_lam A_mu
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import So4Element, as_algebra, dagger, su2_generators
from .constants import DIM, FIELD_FD_STEP
from .errors import DivergenceWarning, UnknownNameError
from .geometry import FlatChart, christoffel, metric_hodge, two_form_norm

# ---------------------------------------------------------------------------
# connection fields


class ConnectionField:
    """Base class: subclasses implement :meth:`jet`."""

    N = 2
    traceless = True
    fd_step = None
    name = "field"

    def jet(self, x, order=2):
        raise NotImplementedError

    def __call__(self, x):
        return self.jet(x, order=0)[0]

    def __repr__(self):
        return f"{type(self).__name__}(N={self.N})"


def _zeros(x, N, nderiv):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[:-1] + (DIM,) * (nderiv + 1) + (N, N), dtype=complex)


class ZeroField(ConnectionField):
    name = "zero"

    def __init__(self, N=2):
        self.N = N
        self.traceless = N > 1

    def jet(self, x, order=2):
        return tuple(_zeros(x, self.N, k) for k in range(order + 1))


class AbelianConstantField(ConnectionField):
    """A_mu(x) = i c_mn x^n G, with G = [[1]] for N = 1 or diag(1, -1) for N = 2.

    The curvature is the constant F_mn = -2 i c_mn G.
    """

    name = "abelian_constant"

    def __init__(self, c, N=1):
        self.c = c if isinstance(c, So4Element) else So4Element(c)
        if N not in (1, 2):
            raise ValueError("abelian field supports N = 1 or N = 2")
        self.N = N
        self.traceless = N == 2
        self.G = np.eye(1, dtype=complex) if N == 1 else np.diag([1.0, -1.0]).astype(complex)

    def jet(self, x, order=2):
        x = np.asarray(x, dtype=float)
        c = self.c.matrix
        A = 1j * np.einsum("mn,...n->...m", c, x)[..., None, None] * self.G
        out = [A]
        if order >= 1:
            # dA[l, m] = i c_ml G
            dA = 1j * c.T[..., None, None] * self.G
            out.append(np.broadcast_to(dA, x.shape[:-1] + dA.shape).copy())
        if order >= 2:
            out.append(_zeros(x, self.N, 2))
        return tuple(out)


def thooft_symbols(bar=False):
    """eta^a_{mn} (self-dual) or eta-bar^a_{mn} (anti-self-dual), 0-based, index 3 = '4'."""
    eta = np.zeros((3, DIM, DIM))
    for a in range(3):
        for m in range(3):
            for n in range(3):
                eta[a, m, n] = np.sign(np.linalg.det(np.eye(3)[[a, m, n]])) if len({a, m, n}) == 3 else 0.0
        s = -1.0 if bar else 1.0
        eta[a, a, 3] = s
        eta[a, 3, a] = -s
    return eta


class BPSTField(ConnectionField):
    """Single instanton in regular gauge, A_mu = 2 eta^a_mn y^n T_a / (|y|^2 + rho^2).

    ``variant`` selects the 't Hooft symbol: ``"eta"`` or ``"eta_bar"``.  Use
    :func:`bpst` to select by measured orientation instead.
    """

    name = "bpst"

    def __init__(self, rho=1.0, center=(0.0, 0.0, 0.0, 0.0), variant="eta_bar"):
        if variant not in ("eta", "eta_bar"):
            raise ValueError("variant must be 'eta' or 'eta_bar'")
        self.rho = float(rho)
        self.center = np.asarray(center, dtype=float)
        self.variant = variant
        self.N = 2
        eta = thooft_symbols(bar=variant == "eta_bar")
        # M[m, n] = 2 eta^a_mn T_a
        self.M = 2.0 * np.einsum("amn,aij->mnij", eta, su2_generators())

    def jet(self, x, order=2):
        y = np.asarray(x, dtype=float) - self.center
        s = 1.0 / (np.sum(y * y, axis=-1) + self.rho**2)
        My = np.einsum("mnij,...n->...mij", self.M, y)  # M_mn y^n
        out = [s[..., None, None, None] * My]
        if order >= 1:
            t1 = s[..., None, None, None, None] * np.swapaxes(self.M, 0, 1)  # [l, m] = M_ml s
            t2 = -2.0 * (s**2)[..., None, None, None, None] * y[..., :, None, None, None] * My[..., None, :, :, :]
            out.append(t1 + t2)
        if order >= 2:
            s2 = (s**2)[..., None, None, None, None, None]
            s3 = (s**3)[..., None, None, None, None, None]
            Mt = np.swapaxes(self.M, 0, 1)  # Mt[l, m] = M_ml
            # M_ml y_k  -> [k, l, m]
            term1 = np.einsum("...k,lmij->...klmij", y, Mt)
            # M_mk y_l  -> [k, l, m]
            term2 = np.einsum("...l,kmij->...klmij", y, Mt)
            term3 = np.einsum("kl,...mij->...klmij", np.eye(DIM), My)
            term4 = np.einsum("...k,...l,...mij->...klmij", y, y, My)
            out.append(-2.0 * s2 * (term1 + term2 + term3) + 8.0 * s3 * term4)
        return tuple(out)

    def __repr__(self):
        return f"BPSTField(rho={self.rho}, center={self.center.tolist()}, variant={self.variant!r})"


class PerturbedField(ConnectionField):
    """base + eps * bump(x) * C_mu with a compactly supported smooth bump."""

    name = "perturbed"

    def __init__(self, base, eps, bump_center=(0.0, 0.0, 0.0, 0.0), bump_width=1.5, directions=None):
        self.base = base
        self.eps = float(eps)
        self.bump_center = np.asarray(bump_center, dtype=float)
        self.bump_width = float(bump_width)
        self.N = base.N
        self.traceless = base.traceless
        if directions is None:
            if base.N != 2:
                raise ValueError("default bump directions exist only for N = 2")
            T = su2_generators()
            directions = np.array([T[0], T[1], T[2], (T[0] - T[2]) / np.sqrt(2.0)])
        self.directions = as_algebra(np.asarray(directions, dtype=complex), traceless=self.traceless)

    def bump_jet(self, x):
        y = np.asarray(x, dtype=float) - self.bump_center
        w2 = self.bump_width**2
        u = np.sum(y * y, axis=-1) / w2
        inside = u < 1.0
        q = 1.0 - np.where(inside, u, 0.0)
        b = np.where(inside, np.exp(-1.0 / q), 0.0)
        qp = -1.0 / q**2  # d(-1/(1-u))/du
        qpp = -2.0 / q**3
        du = 2.0 * y / w2
        db = (b * qp)[..., None] * du
        d2b = (b * (qp**2 + qpp))[..., None, None] * du[..., :, None] * du[..., None, :] + (b * qp)[
            ..., None, None
        ] * (2.0 / w2) * np.eye(DIM)
        return b, db, d2b

    def jet(self, x, order=2):
        base = self.base.jet(x, order)
        b, db, d2b = self.bump_jet(x)
        C = self.directions
        e = self.eps
        out = [base[0] + e * b[..., None, None, None] * C]
        if order >= 1:
            out.append(base[1] + e * np.einsum("...l,mij->...lmij", db, C))
        if order >= 2:
            out.append(base[2] + e * np.einsum("...kl,mij->...klmij", d2b, C))
        return tuple(out)

    def __repr__(self):
        return f"PerturbedField({self.base!r}, eps={self.eps})"


class NumericField(ConnectionField):
    """Field given only by values A(x); derivatives by central differences.

    First derivatives use ``step`` (default 1e-5, error O(step^2)).  Second
    derivatives use ``step2`` (default 1e-3) because the roundoff of a second
    difference grows like step^-2.  ``richardson`` adds one extrapolation level
    with halved steps, raising the truncation order to 4.
    """

    name = "numeric"

    def __init__(self, fn, N, step=FIELD_FD_STEP, step2=1e-3, richardson=False, traceless=True):
        self.fn, self.N = fn, N
        self.fd_step, self.step2 = step, step2
        self.richardson = richardson
        self.traceless = traceless

    def _d1(self, x, h):
        out = []
        for lam in range(DIM):
            dx = np.zeros(DIM)
            dx[lam] = h
            out.append((self.fn(x + dx) - self.fn(x - dx)) / (2 * h))
        return np.stack(out, axis=-4)

    def _d2(self, x, h):
        out = np.empty(x.shape[:-1] + (DIM, DIM, DIM, self.N, self.N), dtype=complex)
        for k in range(DIM):
            for l in range(k, DIM):
                ek = np.zeros(DIM)
                el = np.zeros(DIM)
                ek[k] = h
                el[l] = h
                v = (
                    self.fn(x + ek + el) - self.fn(x + ek - el) - self.fn(x - ek + el) + self.fn(x - ek - el)
                ) / (4 * h * h)
                out[..., k, l, :, :, :] = v
                out[..., l, k, :, :, :] = v
        return out

    def jet(self, x, order=2):
        x = np.asarray(x, dtype=float)
        out = [np.asarray(self.fn(x), dtype=complex)]
        for k, (fd, h) in enumerate(((self._d1, self.fd_step), (self._d2, self.step2)), start=1):
            if order < k:
                break
            d = fd(x, h)
            if self.richardson:
                d = (4.0 * fd(x, h / 2) - d) / 3.0
            out.append(d)
        return tuple(out)


# ---------------------------------------------------------------------------
# jets of products (Leibniz up to third order)


def _mm(spec, a, b):
    return np.einsum(spec, a, b)


def jet_mul(f, g):
    """Product of two matrix jets ``[value, d1, d2, d3]`` (any common order)."""
    order = min(len(f), len(g)) - 1
    out = [_mm("...ab,...bc->...ac", f[0], g[0])]
    if order >= 1:
        out.append(_mm("...lab,...bc->...lac", f[1], g[0]) + _mm("...ab,...lbc->...lac", f[0], g[1]))
    if order >= 2:
        out.append(
            _mm("...klab,...bc->...klac", f[2], g[0])
            + _mm("...kab,...lbc->...klac", f[1], g[1])
            + _mm("...lab,...kbc->...klac", f[1], g[1])
            + _mm("...ab,...klbc->...klac", f[0], g[2])
        )
    if order >= 3:
        f1, f2, f3 = f[1], f[2], f[3]
        g1, g2, g3 = g[1], g[2], g[3]
        out.append(
            _mm("...jklab,...bc->...jklac", f3, g[0])
            + _mm("...jkab,...lbc->...jklac", f2, g1)
            + _mm("...jlab,...kbc->...jklac", f2, g1)
            + _mm("...klab,...jbc->...jklac", f2, g1)
            + _mm("...jab,...klbc->...jklac", f1, g2)
            + _mm("...kab,...jlbc->...jklac", f1, g2)
            + _mm("...lab,...jkbc->...jklac", f1, g2)
            + _mm("...ab,...jklbc->...jklac", f[0], g3)
        )
    return out


def jet_dagger(f):
    return [dagger(v) for v in f]


# ---------------------------------------------------------------------------
# gauge transforms


class GaugeTransform:
    """psi(x) with jets up to third order: ``jet(x)`` -> [psi, d1, d2, d3]."""

    N = 2

    def jet(self, x, order=3):
        raise NotImplementedError

    def __call__(self, x):
        return self.jet(x, order=0)[0]


class AxisGaugeTransform(GaugeTransform):
    """psi(x) = prod_j exp(theta_j(x) X_j), theta_j = a_j sin(k_j . x + p_j).

    Each X_j is anti-Hermitian (traceless for SU(N)), so psi is unitary.
    """

    def __init__(self, generators, amplitudes, wavevectors, phases):
        self.generators = [as_algebra(X, traceless=np.asarray(X).shape[-1] > 1) for X in generators]
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.wavevectors = np.asarray(wavevectors, dtype=float)
        self.phases = np.asarray(phases, dtype=float)
        self.N = self.generators[0].shape[-1]
        self._eig = []
        for X in self.generators:
            lam, V = np.linalg.eigh(1j * X)  # i X Hermitian, X = V diag(-i lam) V^dagger
            self._eig.append((lam, V))

    @classmethod
    def random(cls, rng, N=2, factors=2, amplitude=1.0, frequency=1.0):
        gens, amps, ks, ps = [], [], [], []
        for _ in range(factors):
            m = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
            X = as_algebra(m, traceless=N > 1)
            X /= np.linalg.norm(X)
            gens.append(X)
            amps.append(amplitude * rng.uniform(0.5, 1.0))
            ks.append(frequency * rng.normal(size=DIM))
            ps.append(rng.uniform(0, 2 * np.pi))
        return cls(gens, amps, ks, ps)

    def _factor_jet(self, j, x, order):
        X = self.generators[j]
        lam, V = self._eig[j]
        a, k, p = self.amplitudes[j], self.wavevectors[j], self.phases[j]
        arg = np.einsum("...m,m->...", x, k) + p
        th = a * np.sin(arg)
        E = np.einsum("ia,...a,ja->...ij", V, np.exp(-1j * np.multiply.outer(th, lam)), np.conj(V))
        out = [E]
        if order >= 1:
            th1 = (a * np.cos(arg))[..., None] * k
            out.append(th1[..., :, None, None] * (X @ E)[..., None, :, :])
        if order >= 2:
            th2 = (-a * np.sin(arg))[..., None, None] * np.outer(k, k)
            X2 = X @ X
            out.append(
                th2[..., None, None] * (X @ E)[..., None, None, :, :]
                + (th1[..., :, None] * th1[..., None, :])[..., None, None] * (X2 @ E)[..., None, None, :, :]
            )
        if order >= 3:
            th3 = (-a * np.cos(arg))[..., None, None, None] * np.einsum("j,k,l->jkl", k, k, k)
            sym = (
                th2[..., :, :, None] * th1[..., None, None, :]
                + th2[..., :, None, :] * th1[..., None, :, None]
                + th2[..., None, :, :] * th1[..., :, None, None]
            )
            cube = th1[..., :, None, None] * th1[..., None, :, None] * th1[..., None, None, :]
            XE = (X @ E)[..., None, None, None, :, :]
            out.append(
                th3[..., None, None] * XE
                + sym[..., None, None] * (X @ X @ E)[..., None, None, None, :, :]
                + cube[..., None, None] * (X @ X @ X @ E)[..., None, None, None, :, :]
            )
        return out

    def jet(self, x, order=3):
        x = np.asarray(x, dtype=float)
        out = self._factor_jet(0, x, order)
        for j in range(1, len(self.generators)):
            out = jet_mul(out, self._factor_jet(j, x, order))
        return out


class GaugeTransformedField(ConnectionField):
    """A' = psi^{-1} A psi + psi^{-1} d psi."""

    name = "gauge_transformed"

    def __init__(self, base, psi):
        if base.N != psi.N:
            raise ValueError("gauge transform and field have different N")
        self.base, self.psi = base, psi
        self.N = base.N
        self.traceless = base.traceless

    def jet(self, x, order=2):
        x = np.asarray(x, dtype=float)
        base = self.base.jet(x, order)
        P = self.psi.jet(x, order + 1)
        # mu becomes a batch axis placed just before the derivative axes
        a_mu = [base[0]]
        if order >= 1:
            a_mu.append(np.moveaxis(base[1], -3, -4))
        if order >= 2:
            a_mu.append(np.moveaxis(base[2], -3, -5))
        psi = [np.expand_dims(v, -3 - k) for k, v in enumerate(P[: order + 1])]
        psid = jet_dagger(psi)
        dpsi = P[1 : order + 2]  # jet of d_mu psi; symmetric so mu reads as the first axis
        conj = jet_mul(jet_mul(psid, a_mu), psi)
        pure = jet_mul(psid[: order + 1], dpsi)
        out = [conj[0] + pure[0]]
        if order >= 1:
            out.append(np.moveaxis(conj[1] + pure[1], -4, -3))
        if order >= 2:
            out.append(np.moveaxis(conj[2] + pure[2], -5, -3))
        return tuple(out)


def gauge_transform(A, psi):
    return GaugeTransformedField(A, psi)


# ---------------------------------------------------------------------------
# curvature and its derivatives


def _comm(a, b):
    return a @ b - b @ a


def curvature_from_jet(jet):
    """F[m, n] and, when the jet has second derivatives, dF[l, m, n] = d_l F_mn."""
    A, dA = jet[0], jet[1]
    Am, An = A[..., :, None, :, :], A[..., None, :, :, :]
    F = dA - np.swapaxes(dA, -3, -4) + Am @ An - An @ Am
    if len(jet) < 3:
        return F, None
    d2A = jet[2]
    dAm = dA[..., :, :, None, :, :]  # d_l A_m at [l, m, .]
    dAn = dA[..., :, None, :, :, :]  # d_l A_n at [l, ., n]
    Am3 = A[..., None, :, None, :, :]
    An3 = A[..., None, None, :, :, :]
    dF = d2A - np.swapaxes(d2A, -3, -4) + dAm @ An3 + Am3 @ dAn - dAn @ Am3 - An3 @ dAm
    return F, dF


def curvature(A, x):
    """F_mn = d_m A_n - d_n A_m + [A_m, A_n], shape ``B + (4, 4, N, N)``."""
    return curvature_from_jet(A.jet(x, order=1))[0]


def covariant_derivative_from_jet(jet, gamma):
    """nabla_l F_mn from a second-order jet and Christoffels Gamma[k, l, n]."""
    F, dF = curvature_from_jet(jet)
    A = jet[0]
    out = dF + _comm(A[..., :, None, None, :, :], F[..., None, :, :, :, :])
    out = out - np.einsum("...mkab,...kln->...lmnab", F, gamma)
    out = out - np.einsum("...knab,...klm->...lmnab", F, gamma)
    return F, out


def covariant_derivative_F(A, chart, x):
    """nabla_l F_mn = d_l F_mn + [A_l, F_mn] - F_mk G^k_ln - F_kn G^k_lm."""
    x = np.asarray(x, dtype=float)
    return covariant_derivative_from_jet(A.jet(x, order=2), christoffel(chart, x))[1]


def ym_residual(A, chart, x):
    """(D_A^* F)_n = -g^{ml} nabla_l F_mn, shape ``B + (4, N, N)``."""
    x = np.asarray(x, dtype=float)
    nf = covariant_derivative_F(A, chart, x)
    return -np.einsum("...ml,...lmnab->...nab", chart.inverse_metric(x), nf)


def sd_split(A, chart, x):
    """(F_+, F_-) with F_+- = (F +- *F) / 2 under the metric Hodge star."""
    x = np.asarray(x, dtype=float)
    F = curvature(A, x)
    star = metric_hodge(chart, x, F)
    return 0.5 * (F + star), 0.5 * (F - star)


def self_dual_ratio(A, chart, x):
    """(|F_+| / |F|, |F_-| / |F|) in the metric norm at each point."""
    x = np.asarray(x, dtype=float)
    fp, fm = sd_split(A, chart, x)
    full = two_form_norm(chart, x, fp + fm)
    return two_form_norm(chart, x, fp) / full, two_form_norm(chart, x, fm) / full


def bianchi_defect(A, chart, x):
    """max |nabla_l F_mn + nabla_m F_nl + nabla_n F_lm| at each point."""
    nf = covariant_derivative_F(A, chart, x)
    cyc = nf + np.transpose(nf, _cyc_axes(nf.ndim)) + np.transpose(nf, _cyc_axes(nf.ndim, 2))
    return np.max(np.abs(cyc), axis=(-5, -4, -3, -2, -1))


def _cyc_axes(ndim, times=1):
    # view [l, m, n] as [m, n, l] (times=1) or [n, l, m] (times=2)
    axes = list(range(ndim))
    l, m, n = ndim - 5, ndim - 4, ndim - 3
    perm = {1: (m, n, l), 2: (n, l, m)}[times]
    axes[l], axes[m], axes[n] = perm
    return axes


def action_density(A, chart, x):
    """-1/2 tr(F_mn F^mn) sqrt|det g|."""
    x = np.asarray(x, dtype=float)
    F = curvature(A, x)
    ginv = chart.inverse_metric(x)
    up = np.einsum("...ma,...nb,...abij->...mnij", ginv, ginv, F)
    tr = np.einsum("...mnij,...mnji->...", F, up)
    return (-0.5 * tr).real * chart.sqrt_det(x)


@dataclass(frozen=True)
class ActionResult:
    value: float
    tail_estimate: float
    radius: float
    points: int


def _sphere3_rule(n):
    """Directions and weights on S^3 (total weight 2 pi^2) in hyperspherical angles."""
    xc, wc = np.polynomial.legendre.leggauss(n)
    chi = 0.5 * np.pi * (xc + 1.0)
    wchi = 0.5 * np.pi * wc * np.sin(chi) ** 2
    th = chi.copy()
    wth = 0.5 * np.pi * wc * np.sin(th)
    nph = 2 * n
    ph = 2 * np.pi * np.arange(nph) / nph
    wph = np.full(nph, 2 * np.pi / nph)
    C, T, P = np.meshgrid(chi, th, ph, indexing="ij")
    W = np.einsum("i,j,k->ijk", wchi, wth, wph)
    dirs = np.stack(
        [np.cos(C), np.sin(C) * np.cos(T), np.sin(C) * np.sin(T) * np.cos(P), np.sin(C) * np.sin(T) * np.sin(P)],
        axis=-1,
    )
    return dirs.reshape(-1, DIM), W.ravel()


def ym_action(A, chart=None, radius=20.0, center=(0.0, 0.0, 0.0, 0.0), n_radial=12, n_angular=6, tol=1e-3):
    """S = -1/2 int tr(F_mn F^mn) dVol over the coordinate ball |x - center| < radius.

    Radial Gauss-Legendre on geometrically graded panels, product rule on S^3.
    The tail beyond ``radius`` is estimated from the mean density on the
    outer shell assuming r^-8 decay; a :class:`DivergenceWarning` is issued when
    it exceeds ``tol`` relative to the value.
    """
    chart = chart or FlatChart()
    center = np.asarray(center, dtype=float)
    edges = np.concatenate([[0.0], radius * 2.0 ** -np.arange(10, -1, -1)])
    xg, wg = np.polynomial.legendre.leggauss(n_radial)
    r = np.concatenate([0.5 * (b - a) * xg + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wr = np.concatenate([0.5 * (b - a) * wg for a, b in zip(edges[:-1], edges[1:])])
    dirs, wd = _sphere3_rule(n_angular)
    total = 0.0
    for ri, wi in zip(r, wr):
        dens = action_density(A, chart, center + ri * dirs)
        total += wi * ri**3 * np.dot(wd, dens)
    shell = float(np.dot(wd, action_density(A, chart, center + radius * dirs))) / (2 * np.pi**2)
    tail = shell * 2 * np.pi**2 * radius**4 / 4.0
    if abs(total) > 0 and abs(tail) > tol * abs(total):
        warnings.warn(f"action tail estimate {tail:.3e} exceeds {tol:.0e} relative", DivergenceWarning)
    return ActionResult(float(total), float(tail), float(radius), int(r.size * wd.size))


# ---------------------------------------------------------------------------
# builtin zoo


@functools.lru_cache(maxsize=None)
def orientation_label(variant):
    """Measure which Hodge eigenspace a BPST variant's curvature lies in.

    Returns ``"antidual"`` (F_+ = 0, instanton) or ``"dual"`` (F_- = 0).
    """
    probe = np.array([[0.31, -0.47, 0.62, 0.18], [-0.9, 0.2, 0.1, 0.5]])
    plus, minus = self_dual_ratio(BPSTField(1.0, np.zeros(DIM), variant), FlatChart(), probe)
    if np.max(plus) < 1e-12:
        return "antidual"
    if np.max(minus) < 1e-12:
        return "dual"
    raise RuntimeError(f"BPST variant {variant!r} is neither self-dual nor anti-self-dual")


def bpst(rho=1.0, center=(0.0, 0.0, 0.0, 0.0), orientation="antidual"):
    """BPST field whose measured orientation matches ``orientation``."""
    if orientation not in ("dual", "antidual"):
        raise ValueError("orientation must be 'dual' or 'antidual'")
    for variant in ("eta_bar", "eta"):
        if orientation_label(variant) == orientation:
            return BPSTField(rho, center, variant)
    raise RuntimeError("no BPST variant has the requested orientation")


def _abelian(c=None, left=(1.0, 0.0, 0.0), right=(0.0, 0.0, 0.0), N=1):
    if c is None:
        c = So4Element.from_coefficients(left, right)
    return AbelianConstantField(c, N=N)


def _perturbed(base="bpst", eps=0.1, bump_center=(0.0, 0.0, 0.0, 0.0), bump_width=1.5, base_params=None):
    if isinstance(base, str):
        base = builtin_field(base, **(base_params or {}))
    return PerturbedField(base, eps, bump_center, bump_width)


FIELDS = {
    "zero": lambda N=2: ZeroField(N),
    "abelian_constant": _abelian,
    "bpst": bpst,
    "perturbed": _perturbed,
}


def builtin_field(name, **params):
    try:
        factory = FIELDS[name]
    except KeyError:
        raise UnknownNameError("field", name, FIELDS) from None
    return factory(**params)
