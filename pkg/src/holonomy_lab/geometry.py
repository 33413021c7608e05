"""Riemannian charts, curves on them, and Levi-Civita transport of frames."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from . import _integrate as ig
from .constants import DIM, LEVI_CIVITA, METRIC_FD_STEP
from .errors import SingularMetricError, UnknownNameError

# ---------------------------------------------------------------------------
# charts


class MetricChart:
    """Chart with metric g(x) and its first derivatives dg[..., l, m, n] = d_l g_mn.

    ``fd_step`` is ``None`` for analytic derivatives, otherwise the central
    difference step (truncation error O(step^2)).
    """

    name = "chart"
    fd_step = None
    is_flat = False
    radius = np.inf

    def metric(self, x):
        raise NotImplementedError

    def metric_derivative(self, x):
        x = np.asarray(x, dtype=float)
        h = self.fd_step or METRIC_FD_STEP
        out = np.empty(x.shape[:-1] + (DIM, DIM, DIM))
        for lam in range(DIM):
            dx = np.zeros(DIM)
            dx[lam] = h
            out[..., lam, :, :] = (self.metric(x + dx) - self.metric(x - dx)) / (2 * h)
        return out

    def inverse_metric(self, x):
        return np.linalg.inv(self.metric(x))

    def sqrt_det(self, x):
        return np.sqrt(np.abs(np.linalg.det(self.metric(x))))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.linalg.norm(x, axis=-1) < self.radius))

    def __repr__(self):
        return f"{type(self).__name__}()"


class FlatChart(MetricChart):
    """Euclidean R^4, g = identity."""

    name = "flat"
    is_flat = True

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(DIM), x.shape[:-1] + (DIM, DIM)).copy()

    def metric_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (DIM, DIM, DIM))

    def sqrt_det(self, x):
        return np.ones(np.shape(x)[:-1])


class S4StereographicChart(MetricChart):
    """Unit round S^4 in stereographic coordinates: g = (2 / (1 + |x|^2))^2 delta."""

    name = "s4_stereographic"

    @staticmethod
    def conformal_factor(x):
        x = np.asarray(x, dtype=float)
        return 2.0 / (1.0 + np.sum(x * x, axis=-1))

    def metric(self, x):
        phi = self.conformal_factor(x)
        return (phi**2)[..., None, None] * np.eye(DIM)

    def metric_derivative(self, x):
        x = np.asarray(x, dtype=float)
        phi = self.conformal_factor(x)
        # d_l phi = -phi^2 x_l, so d_l g_mn = -2 phi^3 x_l delta_mn
        return (-2.0 * phi**3)[..., None, None, None] * x[..., :, None, None] * np.eye(DIM)

    def inverse_metric(self, x):
        phi = self.conformal_factor(x)
        return (phi**-2)[..., None, None] * np.eye(DIM)

    def sqrt_det(self, x):
        return self.conformal_factor(x) ** 4


class NumericMetricChart(MetricChart):
    """User-supplied metric with central-difference derivatives."""

    def __init__(self, metric_fn, name="numeric", step=METRIC_FD_STEP, radius=np.inf):
        self._g = metric_fn
        self.name = name
        self.fd_step = step
        self.radius = radius

    def metric(self, x):
        return np.asarray(self._g(np.asarray(x, dtype=float)), dtype=float)


CHARTS = {"flat": FlatChart, "s4_stereographic": S4StereographicChart}


def builtin_chart(name, **params):
    try:
        return CHARTS[name](**params)
    except KeyError:
        raise UnknownNameError("chart", name, CHARTS) from None


def _check_positive(g):
    if np.min(np.linalg.eigvalsh(g), initial=np.inf) <= 0:
        raise SingularMetricError("metric is not positive definite")


def christoffel(chart, x):
    """Gamma[..., k, l, n] = Gamma^k_{ln} of the Levi-Civita connection."""
    x = np.asarray(x, dtype=float)
    g = chart.metric(x)
    _check_positive(g)
    ginv = np.linalg.inv(g)
    dg = chart.metric_derivative(x)
    lower = dg + np.swapaxes(dg, -1, -3)  # d_l g_rn + d_n g_rl, indexed [l, r, n]
    lower = np.swapaxes(lower, -3, -2) - dg  # [r, l, n] minus d_r g_ln
    return 0.5 * np.einsum("...kr,...rln->...kln", ginv, lower)


def metric_hodge(chart, x, F):
    """(*F)_mn = sqrt|det g| / 2 * eps_mnlk F^lk for lower-index two-forms.

    ``x`` has shape ``B + (4,)`` and ``F`` shape ``B + (4, 4) + rest``; the
    trailing axes (gauge indices) are carried along.
    """
    x = np.asarray(x, dtype=float)
    g = chart.metric(x)
    _check_positive(g)
    ginv = np.linalg.inv(g)
    sq = np.sqrt(np.abs(np.linalg.det(g)))
    batch = x.shape[:-1]
    F = np.asarray(F)
    rest = F.shape[len(batch) + 2 :]
    Fr = F.reshape(batch + (DIM, DIM, -1))
    up = np.einsum("...la,...kb,...abr->...lkr", ginv, ginv, Fr)
    star = 0.5 * sq[..., None, None, None] * np.einsum("mnlk,...lkr->...mnr", LEVI_CIVITA, up)
    return star.reshape(batch + (DIM, DIM) + rest)


def metric_pairing(chart, x, F, G):
    """<F, G>_g = sum g^ma g^nb F_mn conj(G_ab), summed over gauge entries too."""
    x = np.asarray(x, dtype=float)
    ginv = chart.inverse_metric(x)
    batch = x.shape[:-1]
    F = np.asarray(F).reshape(batch + (DIM, DIM, -1))
    G = np.asarray(G).reshape(batch + (DIM, DIM, -1))
    return np.einsum("...ma,...nb,...mnr,...abr->...", ginv, ginv, F, np.conj(G)).real


def two_form_norm(chart, x, F):
    return np.sqrt(np.abs(metric_pairing(chart, x, F, F)))


# ---------------------------------------------------------------------------
# curves


class Curve:
    """Piecewise-C^1 path [0, 1] -> chart, vectorized over ``t``."""

    def position(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def pieces(self):
        """Smooth pieces ``[(a, b, static), ...]`` covering [0, 1]."""
        return [(0.0, 1.0, False)]

    def __call__(self, t):
        return self.position(t)

    @property
    def origin(self):
        return self.position(0.0)


def _t(t):
    return np.asarray(t, dtype=float)


class ConstantCurve(Curve):
    def __init__(self, point):
        self.point = np.asarray(point, dtype=float)

    def position(self, t):
        return np.broadcast_to(self.point, _t(t).shape + (DIM,)).copy()

    def velocity(self, t):
        return np.zeros(_t(t).shape + (DIM,))

    def pieces(self):
        return [(0.0, 1.0, True)]

    def __repr__(self):
        return f"ConstantCurve({self.point.tolist()})"


class LineCurve(Curve):
    def __init__(self, start, end):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)

    def position(self, t):
        return self.start + _t(t)[..., None] * (self.end - self.start)

    def velocity(self, t):
        return np.broadcast_to(self.end - self.start, _t(t).shape + (DIM,)).copy()

    def __repr__(self):
        return f"LineCurve({self.start.tolist()}, {self.end.tolist()})"


class CircleCurve(Curve):
    """center + radius (cos(2 pi k t) e_i + sin(2 pi k t) e_j)."""

    def __init__(self, center, radius, plane=(0, 1), turns=1):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.plane = tuple(int(p) for p in plane)
        self.turns = turns

    def _axes(self):
        ei = np.zeros(DIM)
        ej = np.zeros(DIM)
        ei[self.plane[0]] = 1.0
        ej[self.plane[1]] = 1.0
        return ei, ej

    def position(self, t):
        w = 2 * np.pi * self.turns * _t(t)[..., None]
        ei, ej = self._axes()
        return self.center + self.radius * (np.cos(w) * ei + np.sin(w) * ej)

    def velocity(self, t):
        om = 2 * np.pi * self.turns
        w = om * _t(t)[..., None]
        ei, ej = self._axes()
        return self.radius * om * (-np.sin(w) * ei + np.cos(w) * ej)

    def __repr__(self):
        return f"CircleCurve({self.center.tolist()}, {self.radius}, plane={self.plane})"


class FigureEightCurve(Curve):
    """center + size (sin(2 pi t) e_i + sin(4 pi t) / 2 e_j)."""

    def __init__(self, center, size, plane=(0, 1)):
        self.center = np.asarray(center, dtype=float)
        self.size = float(size)
        self.plane = tuple(int(p) for p in plane)

    def position(self, t):
        t = _t(t)
        out = np.broadcast_to(self.center, t.shape + (DIM,)).copy()
        out[..., self.plane[0]] += self.size * np.sin(2 * np.pi * t)
        out[..., self.plane[1]] += 0.5 * self.size * np.sin(4 * np.pi * t)
        return out

    def velocity(self, t):
        t = _t(t)
        out = np.zeros(t.shape + (DIM,))
        out[..., self.plane[0]] = 2 * np.pi * self.size * np.cos(2 * np.pi * t)
        out[..., self.plane[1]] = 2 * np.pi * self.size * np.cos(4 * np.pi * t)
        return out

    def __repr__(self):
        return f"FigureEightCurve({self.center.tolist()}, {self.size}, plane={self.plane})"


class SplineCurve(Curve):
    """Natural cubic spline through control points at uniform parameters."""

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != DIM or len(self.points) < 2:
            raise ValueError("spline needs at least two 4-dimensional control points")
        knots = np.linspace(0.0, 1.0, len(self.points))
        bc = "natural" if len(self.points) > 2 else "not-a-knot"
        self._spline = CubicSpline(knots, self.points, bc_type=bc)
        self._deriv = self._spline.derivative()

    def position(self, t):
        return self._spline(_t(t))

    def velocity(self, t):
        return self._deriv(_t(t))

    def pieces(self):
        # grid nodes on the knots: the third derivative jumps there
        k = self._spline.x
        return [(float(a), float(b), False) for a, b in zip(k[:-1], k[1:])]

    def __repr__(self):
        return f"SplineCurve({len(self.points)} points)"


class TruncatedCurve(Curve):
    """gamma^r: follows gamma up to r, then stays at gamma(r)."""

    def __init__(self, base, r):
        self.base, self.r = base, float(r)

    def position(self, t):
        return self.base.position(np.minimum(_t(t), self.r))

    def velocity(self, t):
        t = _t(t)
        v = self.base.velocity(np.minimum(t, self.r))
        return np.where((t < self.r)[..., None], v, 0.0)

    def pieces(self):
        out = [(a, min(b, self.r), s) for a, b, s in self.base.pieces() if a < self.r]
        return out + [(self.r, 1.0, True)]


class SqueezedCurve(Curve):
    """gamma_{r,eps}: runs through gamma|[0, r] during [0, eps], then stays."""

    def __init__(self, base, r, eps):
        self.base, self.r, self.eps = base, float(r), float(eps)

    def _inner(self, t):
        return self.r * np.minimum(_t(t), self.eps) / self.eps

    def position(self, t):
        return self.base.position(self._inner(t))

    def velocity(self, t):
        t = _t(t)
        v = (self.r / self.eps) * self.base.velocity(self._inner(t))
        return np.where((t < self.eps)[..., None], v, 0.0)

    def pieces(self):
        scale = self.eps / self.r
        out = [(a * scale, min(b, self.r) * scale, s) for a, b, s in self.base.pieces() if a < self.r]
        if self.eps < 1.0:
            out.append((self.eps, 1.0, True))
        return out


class Reparametrization:
    """Non-decreasing piecewise-C^1 sigma with sigma(0) = 0, sigma(1) = 1."""

    breakpoints = ()

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError


class PowerReparametrization(Reparametrization):
    def __init__(self, p):
        if p <= 0:
            raise ValueError("exponent must be positive")
        self.p = float(p)

    def value(self, t):
        return _t(t) ** self.p

    def derivative(self, t):
        t = np.maximum(_t(t), 0.0)
        return self.p * t ** (self.p - 1.0)


class PiecewiseLinearReparametrization(Reparametrization):
    def __init__(self, knots, values):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if (
            self.knots[0] != 0.0
            or self.knots[-1] != 1.0
            or self.values[0] != 0.0
            or self.values[-1] != 1.0
            or np.any(np.diff(self.knots) <= 0)
            or np.any(np.diff(self.values) < 0)
        ):
            raise ValueError("need knots 0..1 increasing and values 0..1 non-decreasing")
        self.breakpoints = tuple(self.knots[1:-1])
        self._slopes = np.diff(self.values) / np.diff(self.knots)

    def value(self, t):
        return np.interp(_t(t), self.knots, self.values)

    def derivative(self, t):
        i = np.clip(np.searchsorted(self.knots, _t(t), side="right") - 1, 0, len(self._slopes) - 1)
        return self._slopes[i]


class ReparametrizedCurve(Curve):
    """gamma o sigma."""

    def __init__(self, base, sigma):
        self.base, self.sigma = base, sigma

    def position(self, t):
        return self.base.position(self.sigma.value(t))

    def velocity(self, t):
        return self.base.velocity(self.sigma.value(t)) * self.sigma.derivative(t)[..., None]

    def pieces(self):
        fine = np.linspace(0.0, 1.0, 20001)
        sv = self.sigma.value(fine)
        cuts = set(self.sigma.breakpoints)
        for a, _, _ in self.base.pieces()[1:]:
            cuts.add(float(np.interp(a, sv, fine)))
        edges = [0.0] + sorted(c for c in cuts if 0.0 < c < 1.0) + [1.0]
        return [(a, b, False) for a, b in zip(edges[:-1], edges[1:])]


def truncate(curve, r):
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    if r == 1.0:
        return curve
    if r == 0.0:
        return ConstantCurve(curve.position(0.0))
    return TruncatedCurve(curve, r)


def squeeze(curve, r, eps):
    if not 0.0 <= r <= 1.0 or not 0.0 < eps <= 1.0:
        raise ValueError("need r in [0, 1] and eps in (0, 1]")
    if r == 0.0:
        return ConstantCurve(curve.position(0.0))
    return SqueezedCurve(curve, r, eps)


def reparametrize(curve, sigma):
    return ReparametrizedCurve(curve, sigma)


CURVES = {
    "line": LineCurve,
    "circle": CircleCurve,
    "figure_eight": FigureEightCurve,
    "spline": SplineCurve,
    "constant": ConstantCurve,
}


def builtin_curve(name, **params):
    try:
        cls = CURVES[name]
    except KeyError:
        raise UnknownNameError("curve family", name, CURVES) from None
    return cls(**params)


# ---------------------------------------------------------------------------
# directions h in H^1_{0,0}


class SineProfile:
    def __init__(self, k):
        self.k = int(k)

    def value(self, t):
        return np.sin(self.k * np.pi * _t(t))

    def derivative(self, t):
        return self.k * np.pi * np.cos(self.k * np.pi * _t(t))

    def __repr__(self):
        return f"sin({self.k} pi t)"


class PolyProfile:
    """t (1 - t) t^j."""

    def __init__(self, j):
        self.j = int(j)

    def value(self, t):
        t = _t(t)
        return t ** (self.j + 1) * (1.0 - t)

    def derivative(self, t):
        t = _t(t)
        j = self.j
        return (j + 1) * t**j - (j + 2) * t ** (j + 1)

    def __repr__(self):
        return f"t^{self.j + 1} (1 - t)"


class DirectionField:
    """h(t) = sum_i profile_i(t) vector_i, components in the transported frame."""

    def __init__(self, terms):
        self.terms = [(p, np.asarray(v, dtype=float)) for p, v in terms]
        ends = self.value(np.array([0.0, 1.0]))
        if np.max(np.abs(ends), initial=0.0) > 1e-14:
            raise ValueError("direction must vanish at t = 0 and t = 1")

    @classmethod
    def single(cls, profile, axis, weight=1.0):
        v = np.zeros(DIM)
        v[axis] = weight
        return cls([(profile, v)])

    @classmethod
    def zero(cls):
        return cls([])

    def value(self, t):
        t = _t(t)
        out = np.zeros(t.shape + (DIM,))
        for p, v in self.terms:
            out = out + p.value(t)[..., None] * v
        return out

    def derivative(self, t):
        t = _t(t)
        out = np.zeros(t.shape + (DIM,))
        for p, v in self.terms:
            out = out + p.derivative(t)[..., None] * v
        return out

    def __add__(self, other):
        return DirectionField(self.terms + other.terms)

    def __mul__(self, c):
        return DirectionField([(p, c * v) for p, v in self.terms])

    __rmul__ = __mul__

    def __repr__(self):
        return " + ".join(f"{p!r}*{v.tolist()}" for p, v in self.terms) or "0"


# ---------------------------------------------------------------------------
# sampling and Levi-Civita transport


def stage_samples(curve, grid):
    """Positions and velocities at the stage times, each of shape (n, 3, 4)."""
    ts = grid.stage_times
    return curve.position(ts), curve.velocity(ts)


def curve_length(chart, curve, grid=None, n=2000):
    grid = grid or ig.make_grid(curve.pieces(), n)
    x, v = stage_samples(curve, grid)
    speed = np.sqrt(np.einsum("...m,...mn,...n->...", v, chart.metric(x), v))
    return float(ig.simpson(speed, grid.h))


def orthonormal_frame(chart, x):
    """Symmetric g(x)^{-1/2}; columns form a positively oriented orthonormal frame."""
    g = chart.metric(np.asarray(x, dtype=float))
    _check_positive(g)
    w, q = np.linalg.eigh(g)
    return (q / np.sqrt(w)) @ q.T


class FramePath:
    """Levi-Civita transported frame; ``nodes[k][:, mu]`` is Z_mu at node k."""

    def __init__(self, grid, nodes, stages):
        self.grid, self.nodes, self.stages = grid, nodes, stages

    def at(self, t):
        return self.nodes[self.grid.index_of(t)]

    def gram(self, chart, curve):
        x = curve.position(self.grid.nodes)
        return np.einsum("...am,...ab,...bn->...mn", self.nodes, chart.metric(x), self.nodes)

    def orthonormality_defect(self, chart, curve):
        return float(np.max(np.abs(self.gram(chart, curve) - np.eye(DIM))))


def levi_civita_transport(chart, curve, initial_frame=None, n=2000, grid=None):
    """Solve Z' + Gamma(Z, gamma') = 0 for each frame vector with RK4."""
    grid = grid or ig.make_grid(curve.pieces(), n)
    x, v = stage_samples(curve, grid)
    z0 = orthonormal_frame(chart, curve.position(0.0)) if initial_frame is None else np.asarray(initial_frame, dtype=float)
    if chart.is_flat:
        nodes = np.broadcast_to(z0, (grid.n + 1, DIM, DIM)).copy()
        stages = np.broadcast_to(z0, (grid.n, 3, DIM, DIM)).copy()
        return FramePath(grid, nodes, stages)
    gen = np.einsum("...kln,...n->...kl", christoffel(chart, x), v)
    P = ig.rk4_propagators(gen, grid.h)
    nodes = ig.accumulate(P, z0)
    return FramePath(grid, nodes, ig.stage_values(nodes, gen, grid.h))
