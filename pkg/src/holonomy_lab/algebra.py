"""Matrix algebra: gauge-algebra values, so(4) and its left/right splitting.

Gauge values (A_mu, F_mu_nu, U) are plain complex ndarrays with the gauge
indices last.  Two-form blocks are arrays of shape ``(..., 4, 4, N, N)``.
Only :class:`So4Element` is wrapped, because its antisymmetry is enforced.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .constants import DIM, LEVI_CIVITA

# ---------------------------------------------------------------------------
# gauge values


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def as_algebra(m, traceless=True):
    """Project onto anti-Hermitian (and traceless) matrices."""
    m = np.asarray(m, dtype=complex)
    out = 0.5 * (m - dagger(m))
    n = out.shape[-1]
    if traceless and n > 1:
        tr = np.trace(out, axis1=-2, axis2=-1) / n
        out = out - tr[..., None, None] * np.eye(n)
    return out


def reunitarize(m):
    """Nearest unitary matrix (polar factor)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def is_algebra(m, traceless=True, tol=1e-10):
    m = np.asarray(m)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    ok = np.max(np.abs(m + dagger(m)), initial=0.0) <= tol * scale
    if traceless and m.shape[-1] > 1:
        ok = ok and np.max(np.abs(np.trace(m, axis1=-2, axis2=-1)), initial=0.0) <= tol * scale
    return bool(ok)


def unitarity_defect(u):
    """Frobenius norm of U^dagger U - I (max over leading axes)."""
    n = u.shape[-1]
    d = dagger(u) @ u - np.eye(n)
    return float(np.max(np.linalg.norm(d, axis=(-2, -1)), initial=0.0))


def su2_generators():
    """T_a = -i sigma_a / 2, so that [T_a, T_b] = eps_abc T_c."""
    sigma = np.array(
        [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
    )
    return -0.5j * sigma


def gauge_trace(m):
    """Trace over gauge indices."""
    return np.trace(m, axis1=-2, axis2=-1)


def index_trace(block):
    """Trace over the 4-dimensional index pair, entrywise in gauge indices."""
    return np.einsum("...mmab->...ab", block)


# ---------------------------------------------------------------------------
# so(4)


class So4Element:
    """Real antisymmetric 4x4 matrix."""

    __slots__ = ("_m",)

    def __init__(self, matrix, tol=1e-12):
        m = np.array(matrix, dtype=float)
        if m.shape != (DIM, DIM):
            raise ValueError(f"so(4) element must be 4x4, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m + m.T)) > tol * scale:
            raise ValueError("so(4) element must be antisymmetric")
        m = 0.5 * (m - m.T)
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self):
        return self._m

    @classmethod
    def from_coefficients(cls, left=(0.0, 0.0, 0.0), right=(0.0, 0.0, 0.0)):
        """Combination sum_i left_i e_i + sum_i right_i f_i."""
        m = np.zeros((DIM, DIM))
        for c, e in zip(left, _LEFT):
            m += c * e
        for c, f in zip(right, _RIGHT):
            m += c * f
        return cls(m)

    def coefficients(self):
        """Inverse of :meth:`from_coefficients`: (left(3), right(3))."""
        left = tuple(float(np.sum(self._m * e)) / 4.0 for e in _LEFT)
        right = tuple(float(np.sum(self._m * f)) / 4.0 for f in _RIGHT)
        return left, right

    def __add__(self, other):
        return So4Element(self._m + other.matrix)

    def __sub__(self, other):
        return So4Element(self._m - other.matrix)

    def __neg__(self):
        return So4Element(-self._m)

    def __mul__(self, c):
        return So4Element(float(c) * self._m)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, So4Element) and np.array_equal(self._m, other.matrix)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        left, right = self.coefficients()
        return f"So4Element(left={left}, right={right})"


def _qmatrix(b, c, d, right):
    # displayed Lie(S^3_L) / Lie(S^3_R) forms with a = 0
    s = -1.0 if right else 1.0
    return np.array(
        [
            [0.0, -b, -c, -d],
            [b, 0.0, -s * d, s * c],
            [c, s * d, 0.0, -s * b],
            [d, -s * c, s * b, 0.0],
        ]
    )


_LEFT = tuple(_qmatrix(*v, right=False) for v in np.eye(3))
_RIGHT = tuple(_qmatrix(*v, right=True) for v in np.eye(3))
for _a in _LEFT + _RIGHT:
    _a.setflags(write=False)


def left_basis():
    """e_1, e_2, e_3 spanning Lie(S^3_L) (b, c, d = 1 respectively)."""
    return tuple(So4Element(e) for e in _LEFT)


def right_basis():
    """f_1, f_2, f_3 spanning Lie(S^3_R)."""
    return tuple(So4Element(f) for f in _RIGHT)


def _matrix_of(a):
    return a.matrix if isinstance(a, So4Element) else np.asarray(a)


def index_hodge(a):
    """Component Hodge dual (*a)_mn = 1/2 eps_mnlk a_lk.

    Accepts an :class:`So4Element`, a real ``(..., 4, 4)`` array when
    ``ndim == 2``, or a two-form block ``(..., 4, 4, N, N)``.
    """
    if isinstance(a, So4Element):
        return So4Element(0.5 * np.einsum("mnlk,lk->mn", LEVI_CIVITA, a.matrix))
    a = np.asarray(a)
    if a.ndim == 2:
        return 0.5 * np.einsum("mnlk,lk->mn", LEVI_CIVITA, a)
    return 0.5 * np.einsum("mnlk,...lkab->...mnab", LEVI_CIVITA, a)


def self_dual_part(block):
    """B_+ = (B + *B)/2 for a two-form block."""
    return 0.5 * (block + index_hodge(block))


def anti_self_dual_part(block):
    return 0.5 * (block - index_hodge(block))


def _project(a, basis):
    m = _matrix_of(a)
    out = np.zeros((DIM, DIM))
    for e in basis:
        out += np.sum(m * e) / np.sum(e * e) * e
    return out


def project_left(a):
    """Orthogonal projection of so(4) onto Lie(S^3_L), by basis expansion."""
    return So4Element(_project(a, _LEFT))


def project_right(a):
    return So4Element(_project(a, _RIGHT))


def so4_pairing(a, block):
    """tr(a B) = sum_mn a_mn B_nm, a gauge matrix."""
    return np.einsum("mn,...nmab->...ab", _matrix_of(a), block)


def exp_so4(a, t):
    """exp(t a); ``t`` may be an array, giving shape ``t.shape + (4, 4)``."""
    t = np.asarray(t, dtype=float)
    return scipy.linalg.expm(t[..., None, None] * _matrix_of(a))


def frobenius(a, b):
    return float(np.sum(_matrix_of(a) * _matrix_of(b)))


def commutator(a, b):
    return a @ b - b @ a


class RotationPath:
    """One-parameter subgroup W(t) = exp(t * generator) in SO(4)."""

    def __init__(self, generator, name=None):
        if not isinstance(generator, So4Element):
            generator = So4Element(generator)
        self.generator = generator
        self.name = name
        self._cache = {}

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        key = (t.shape, t.tobytes()) if t.size <= 4096 else None
        if key is not None and key in self._cache:
            return self._cache[key]
        w = exp_so4(self.generator, t)
        if key is not None:
            self._cache.setdefault(key, w)
        return w

    def log_derivative(self, t):
        """L_W(t) = W(t)^{-1} W'(t); constant for a one-parameter subgroup."""
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.generator.matrix, t.shape + (DIM, DIM))

    @classmethod
    def identity(cls):
        return cls(So4Element(np.zeros((DIM, DIM))), name="identity")

    @classmethod
    def from_coefficients(cls, left=(0.0, 0.0, 0.0), right=(0.0, 0.0, 0.0), name=None):
        return cls(So4Element.from_coefficients(left, right), name=name)

    def __repr__(self):
        return f"RotationPath({self.name or self.generator!r})"


def check_rotation_path(path, ts, step=1e-5):
    """Deviations of W(t) from SO(4) and of W^{-1}W' (central difference) from L_W.

    Returns ``(orthogonality, determinant, log_derivative)`` maxima over ``ts``.
    """
    ts = np.asarray(ts, dtype=float)
    w = path(ts)
    orth = float(np.max(np.abs(np.swapaxes(w, -1, -2) @ w - np.eye(DIM))))
    det = float(np.max(np.abs(np.linalg.det(w) - 1.0)))
    wdot = (path(ts + step) - path(ts - step)) / (2 * step)
    lw = np.swapaxes(w, -1, -2) @ wdot
    drift = float(np.max(np.abs(lw - path.log_derivative(ts))))
    return orth, det, drift
