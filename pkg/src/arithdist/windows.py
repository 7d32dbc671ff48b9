"""Bump windows and their Bessel transforms B_d, B_f.

The window ``w_delta`` rises on [delta, 2 delta] through the smooth step
``g(t) = h(t) / (h(t) + h(1 - t))``, ``h(t) = exp(-1/t)``, stays at 1 and
falls symmetrically on [1 - delta, 1].

Two independent evaluation routes exist for the transforms:

* :func:`transform_d` / :func:`transform_f` integrate the defining kernels
  ``Y_0``, ``K_0``, ``J_{k-1}`` against the window with :func:`adaptive_quad`.
* :class:`TransformInterpolant` serves bulk evaluation. For B_d it uses the
  integrated-by-parts form (only the ramps contribute, kernels ``Y_1``/``K_1``),
  for B_f the defining integral, both by composite Gauss-Legendre in
  ``t = sqrt(u)``. Beyond ``|xi| = 1`` values are interpolated by Chebyshev
  series on unit panels in ``s = sqrt(|xi|)``, where the transform is a
  band-limited function (frequencies at most 4 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special import (
    QuadratureAccuracyError,
    adaptive_quad,
    bessel_j,
    bessel_k0,
    bessel_k1,
    bessel_y0,
    bessel_y1,
)

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi

CHEB_NODES = 32
GL_NODES = 24
DIRECT_S = 1.0
# K_1(4 pi s sqrt(u)) below this exponent is treated as zero
K_CUTOFF = 700.0


class DomainError(ValueError):
    """Window or transform parameters outside their documented range."""


@dataclass(frozen=True)
class WindowSpec:
    """Single bump ``w_delta`` or difference ``w_delta - w_epsilon``.

    Attributes
    ----------
    delta : float
        Ramp width, in (0, 1/4).
    epsilon : float or None
        When set, the window is the difference with ``delta < epsilon < 1/4``.
    """

    delta: float
    epsilon: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta < 0.25:
            raise DomainError(f"delta must lie in (0, 1/4), got {self.delta}")
        if self.epsilon is not None and not self.delta < self.epsilon < 0.25:
            raise DomainError(f"need delta < epsilon < 1/4, got {self.delta}, {self.epsilon}")

    @classmethod
    def single(cls, delta: float) -> "WindowSpec":
        return cls(delta)

    @classmethod
    def difference(cls, delta: float, epsilon: float) -> "WindowSpec":
        return cls(delta, epsilon)

    @property
    def kind(self) -> str:
        return "single" if self.epsilon is None else "difference"

    def _parts(self):
        """(width, sign) pairs of the single windows composing this one."""
        if self.epsilon is None:
            return [(self.delta, 1.0)]
        return [(self.delta, 1.0), (self.epsilon, -1.0)]

    def ramps(self):
        """(lo, hi, width, side, sign) for each rising/falling ramp."""
        out = []
        for d, sign in self._parts():
            out.append((d, 2.0 * d, d, +1, sign))
            out.append((1.0 - d, 1.0, d, -1, sign))
        return out

    def breakpoints(self):
        pts = set()
        for lo, hi, *_ in self.ramps():
            pts.update((lo, hi))
        return sorted(pts)

    def support(self):
        """Lower and upper end of the support."""
        return self.delta, 1.0


def bump_step(t):
    """Smooth step g(t): 0 for t <= 0, 1 for t >= 1, g(1/2) = 1/2."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    m = (t > 0.0) & (t < 1.0)
    tt = t[m]
    with np.errstate(over="ignore"):
        out[m] = 1.0 / (1.0 + np.exp(1.0 / tt - 1.0 / (1.0 - tt)))
    return out


def bump_step_prime(t):
    """Derivative g'(t) = g (1 - g) (1/t^2 + 1/(1-t)^2), zero outside (0, 1)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tt = t[m]
    with np.errstate(over="ignore"):
        e = np.exp(1.0 / tt - 1.0 / (1.0 - tt))
    g = 1.0 / (1.0 + e)
    # g (1 - g) = e / (1 + e)^2, written to stay finite when e overflows
    gg = np.where(np.isfinite(e), g * (1.0 - g), 0.0)
    out[m] = gg * (1.0 / tt**2 + 1.0 / (1.0 - tt) ** 2)
    return out


def _single(d, x):
    out = np.zeros_like(x)
    up = (x > d) & (x < 2.0 * d)
    out[up] = bump_step((x[up] - d) / d)
    flat = (x >= 2.0 * d) & (x <= 1.0 - d)
    out[flat] = 1.0
    down = (x > 1.0 - d) & (x < 1.0)
    out[down] = bump_step((1.0 - x[down]) / d)
    return out


def _single_prime(d, x):
    out = np.zeros_like(x)
    up = (x > d) & (x < 2.0 * d)
    out[up] = bump_step_prime((x[up] - d) / d) / d
    down = (x > 1.0 - d) & (x < 1.0)
    out[down] = -bump_step_prime((1.0 - x[down]) / d) / d
    return out


def window_eval(spec: WindowSpec, x):
    """Evaluate the window at scalar or array ``x``."""
    xa = np.asarray(x, dtype=float)
    flat = xa.reshape(-1)
    out = np.zeros_like(flat)
    for d, sign in spec._parts():
        out += sign * _single(d, flat)
    out = out.reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


def window_derivative(spec: WindowSpec, x):
    """Exact derivative of the window."""
    xa = np.asarray(x, dtype=float)
    flat = xa.reshape(-1)
    out = np.zeros_like(flat)
    for d, sign in spec._parts():
        out += sign * _single_prime(d, flat)
    out = out.reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


@lru_cache(maxsize=64)
def window_l2_norm(spec: WindowSpec) -> float:
    """(integral of w^2)^(1/2) over the support."""
    lo, hi = spec.support()
    r = adaptive_quad(lambda u: window_eval(spec, u) ** 2, lo, hi, tol=1e-14,
                      breakpoints=spec.breakpoints())
    return math.sqrt(r.value)


# ---------------------------------------------------------------------------
# direct (adaptive) transforms


@dataclass(frozen=True)
class TransformValue:
    xi: float
    value: float
    quad_error: float


def transform_d(spec: WindowSpec, xi: float, tol: float = 1e-9) -> TransformValue:
    """B_d(w)(xi) from its defining integral.

    ``-2 pi int w(u) Y_0(4 pi sqrt(xi u)) du`` for xi > 0 and
    ``4 int w(u) K_0(4 pi sqrt(|xi| u)) du`` for xi < 0.

    Raises
    ------
    QuadratureAccuracyError
        If the adaptive rule cannot reach ``tol``.
    """
    xi = float(xi)
    if xi == 0.0 or not math.isfinite(xi):
        raise DomainError("transform_d needs finite nonzero xi")
    a = FOUR_PI * math.sqrt(abs(xi))
    if xi > 0:
        def f(u):
            return -TWO_PI * window_eval(spec, u) * bessel_y0(a * np.sqrt(u))
    else:
        def f(u):
            z = a * np.sqrt(u)
            return 4.0 * window_eval(spec, u) * _k0_safe(z)
    return _direct(spec, xi, f, tol)


def transform_f(spec: WindowSpec, k: int, xi: float, tol: float = 1e-9) -> TransformValue:
    """B_f(w)(xi) = 2 pi i^k int w(u) J_{k-1}(4 pi sqrt(xi u)) du, xi > 0."""
    if k != 12:
        raise DomainError(f"only weight 12 is supported, got {k}")
    xi = float(xi)
    if not xi > 0 or not math.isfinite(xi):
        raise DomainError("transform_f needs xi > 0")
    a = FOUR_PI * math.sqrt(xi)
    sign = (-1.0) ** (k // 2)

    def f(u):
        return sign * TWO_PI * window_eval(spec, u) * bessel_j(k - 1, a * np.sqrt(u))

    return _direct(spec, xi, f, tol)


def _k0_safe(z):
    out = np.zeros_like(z)
    m = z < K_CUTOFF
    out[m] = bessel_k0(z[m])
    return out


def _k1_safe(z):
    out = np.zeros_like(z)
    m = z < K_CUTOFF
    out[m] = bessel_k1(z[m])
    return out


def _direct(spec, xi, f, tol):
    lo, hi = spec.support()
    # panels no wider than 1/(8 sqrt|xi|) resolve the kernel oscillation
    scale = 1.0 / (4.0 * math.sqrt(abs(xi))) if abs(xi) > 1 else None
    r = adaptive_quad(f, lo, hi, tol=0.5 * tol, scale=scale, breakpoints=spec.breakpoints())
    return TransformValue(xi, r.value, r.error_estimate)


# ---------------------------------------------------------------------------
# Gauss-Legendre route and Chebyshev interpolation

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)
_CHEB_THETA = math.pi * (np.arange(CHEB_NODES) + 0.5) / CHEB_NODES
_CHEB_X = np.cos(_CHEB_THETA)
# coefficient matrix: c_j = sum_i M[j, i] f(x_i)
_CHEB_M = (2.0 / CHEB_NODES) * np.cos(np.outer(np.arange(CHEB_NODES), _CHEB_THETA))
_CHEB_M[0] *= 0.5


def _gl_nodes(t_lo, t_hi, n_panels):
    edges = np.linspace(t_lo, t_hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * _GL_X).ravel()
    w = (half[:, None] * _GL_W).ravel()
    return t, w


def _panels(t_lo, t_hi, s):
    # one panel per kernel oscillation, at least 8 to resolve the ramp shape
    return max(8, math.ceil(2.0 * s * (t_hi - t_lo)) + 1)


def _gl_transform(spec: WindowSpec, kind: str, s_values, negative: bool):
    """Transform at xi = +-s^2 for a batch of s sharing one quadrature grid."""
    s_values = np.asarray(s_values, dtype=float)
    s_top = float(s_values.max())
    total = np.zeros_like(s_values)
    if kind == "d":
        for lo, hi, width, side, sign in spec.ramps():
            t, w = _gl_nodes(math.sqrt(lo), math.sqrt(hi), _panels(math.sqrt(lo), math.sqrt(hi), s_top))
            u = t * t
            if side > 0:
                wp = bump_step_prime((u - width) / width) / width
            else:
                wp = -bump_step_prime((1.0 - u) / width) / width
            # du = 2 t dt; integrand w'(u) (t / s) kernel(4 pi s t)
            weight = sign * w * wp * 2.0 * t * t
            z = FOUR_PI * np.outer(s_values, t)
            if negative:
                kern = (2.0 / math.pi) * _k1_safe(z.ravel()).reshape(z.shape)
            else:
                kern = bessel_y1(z.ravel()).reshape(z.shape)
            total += (kern * weight).sum(axis=1) / s_values
        return total
    if negative:
        return total
    lo, hi = spec.support()
    edges = sorted(set([math.sqrt(b) for b in spec.breakpoints()] + [math.sqrt(lo), math.sqrt(hi)]))
    for t_lo, t_hi in zip(edges[:-1], edges[1:]):
        t, w = _gl_nodes(t_lo, t_hi, _panels(t_lo, t_hi, s_top))
        weight = w * window_eval(spec, t * t) * 2.0 * t
        z = FOUR_PI * np.outer(s_values, t)
        kern = bessel_j(11, z.ravel()).reshape(z.shape)
        total += (kern * weight).sum(axis=1)
    return TWO_PI * total


def transform_values_direct(spec: WindowSpec, kind: str, xi, chunk: int = 64):
    """Gauss-Legendre evaluation at each xi (no interpolation)."""
    xi = np.asarray(xi, dtype=float).ravel()
    out = np.zeros_like(xi)
    for negative in (False, True):
        idx = np.flatnonzero((xi < 0) if negative else (xi > 0))
        if idx.size == 0:
            continue
        s = np.sqrt(np.abs(xi[idx]))
        order = np.argsort(s, kind="stable")
        for lo in range(0, idx.size, chunk):
            sel = order[lo:lo + chunk]
            out[idx[sel]] = _gl_transform(spec, kind, s[sel], negative)
    return out


class TransformInterpolant:
    """Fast evaluation of B_d(w) or B_f(w) for |xi| up to ``xi_max``.

    Values for ``|xi| < 1`` come from Gauss-Legendre directly; beyond, from a
    Chebyshev series of ``CHEB_NODES`` terms on each unit panel
    ``[s0, s0 + 1]`` of ``s = sqrt(|xi|)``.
    """

    def __init__(self, spec: WindowSpec, kind: str = "d", xi_max: float = 1e3):
        if kind not in ("d", "f"):
            raise DomainError(f"kind must be 'd' or 'f', got {kind!r}")
        self.spec = spec
        self.kind = kind
        self.s_lo = DIRECT_S
        self._coef = {False: np.zeros((0, CHEB_NODES)), True: np.zeros((0, CHEB_NODES))}
        self.extend(xi_max)

    @property
    def xi_max(self) -> float:
        return (self.s_lo + self._coef[False].shape[0]) ** 2

    def _neg_panels(self, n_pos):
        if self.kind == "f":
            return 0
        # K_1 part vanishes once 4 pi s sqrt(delta_min) exceeds the cutoff
        dmin = self.spec.delta
        s_dead = K_CUTOFF / (FOUR_PI * math.sqrt(dmin)) + 1.0
        return min(n_pos, max(0, math.ceil(s_dead - self.s_lo)))

    def extend(self, xi_max: float) -> None:
        """Add panels until ``xi_max`` is covered."""
        n_pos = max(1, math.ceil(math.sqrt(xi_max) - self.s_lo))
        for negative in (False, True):
            need = n_pos if not negative else self._neg_panels(n_pos)
            have = self._coef[negative].shape[0]
            if need <= have:
                continue
            new = []
            for p in range(have, need):
                s = self.s_lo + p + 0.5 * (1.0 + _CHEB_X)
                vals = _gl_transform(self.spec, self.kind, s, negative)
                new.append((_CHEB_M * vals).sum(axis=1))
            self._coef[negative] = np.vstack([self._coef[negative], np.array(new)])

    def __call__(self, xi):
        xa = np.asarray(xi, dtype=float)
        flat = xa.ravel()
        if np.any(flat == 0):
            raise DomainError("transform undefined at xi = 0")
        s = np.sqrt(np.abs(flat))
        if s.max(initial=0.0) > math.sqrt(self.xi_max) * (1 + 1e-12):
            raise DomainError(f"|xi| = {s.max() ** 2:g} beyond interpolant range {self.xi_max:g}")
        out = np.zeros_like(flat)
        near = s < self.s_lo
        if near.any():
            out[near] = transform_values_direct(self.spec, self.kind, flat[near])
        for negative in (False, True):
            m = ~near & ((flat < 0) if negative else (flat > 0))
            if not m.any():
                continue
            coef = self._coef[negative]
            idx = np.flatnonzero(m)
            panel = np.minimum(np.floor(s[idx] - self.s_lo).astype(np.int64),
                               self._coef[False].shape[0] - 1)
            inside = panel < coef.shape[0]
            idx, panel = idx[inside], panel[inside]
            x = 2.0 * (s[idx] - self.s_lo - panel) - 1.0
            out[idx] = _clenshaw(coef[panel], x)
        return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)

    def envelope_constant(self, A: float, xi_lo: float, xi_hi: float, n: int = 4000) -> float:
        """max |B(xi)| xi^(A/2 + 1/4) over a dense grid of [xi_lo, xi_hi]."""
        xs = np.geomspace(xi_lo, xi_hi, n)
        return float(np.max(np.abs(self(xs)) * xs ** (0.5 * A + 0.25)))


def _clenshaw(coef, x):
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    x2 = 2.0 * x
    for j in range(coef.shape[1] - 1, 0, -1):
        b1, b2 = coef[:, j] + x2 * b1 - b2, b1
    return coef[:, 0] + x * b1 - b2


# ---------------------------------------------------------------------------
# Plancherel


@dataclass(frozen=True)
class PlancherelResult:
    lhs: float
    rhs: float
    rel_err: float
    tail_estimate: float
    hole_estimate: float


def plancherel_check(delta: float, epsilon: float, Xi: float = 1e3, grid_step: float = 0.01,
                     hole: float = 1e-6) -> PlancherelResult:
    """Compare the L^2 norm of B_d(phi) on [-Xi, Xi] with that of phi.

    ``phi = w_delta - w_epsilon``. The left side is a trapezoid sum: uniform
    step ``grid_step`` on ``1 <= |xi| <= Xi`` and uniform in ``log|xi|`` on
    ``hole <= |xi| <= 1``. The part beyond ``Xi`` is not included in ``lhs``;
    it is estimated from the decay envelope ``|B| <= C xi^(-5/4)`` with C
    calibrated on [Xi/2, Xi] and reported as ``tail_estimate``. The excluded
    hole ``|xi| < hole`` is estimated from a fit ``B ~ alpha log|xi| + beta``
    and reported as ``hole_estimate``; neither estimate enters ``rel_err``.
    """
    if not 0 < delta < epsilon < 0.25:
        raise DomainError(f"need 0 < delta < epsilon < 1/4, got {delta}, {epsilon}")
    if Xi < 1e3:
        raise DomainError("Xi must be at least 1e3")
    spec = WindowSpec.difference(delta, epsilon)
    interp = TransformInterpolant(spec, "d", Xi)

    lhs = 0.0
    log_grid = np.linspace(math.log(hole), 0.0, 4001)
    xs = np.exp(log_grid)
    for sgn in (1.0, -1.0):
        b = interp(sgn * xs)
        lhs += np.trapezoid(b * b * xs, log_grid)
    n = int(round((Xi - 1.0) / grid_step))
    xs = np.linspace(1.0, Xi, n + 1)
    for sgn in (1.0, -1.0):
        b = interp(sgn * xs)
        lhs += np.trapezoid(b * b, xs)

    rhs = adaptive_quad(lambda u: window_eval(spec, u) ** 2, delta, 1.0, tol=1e-14,
                        breakpoints=spec.breakpoints()).value
    c2 = interp.envelope_constant(2.0, 0.5 * Xi, Xi)
    tail = (2.0 / 3.0) * c2 * c2 * Xi ** -1.5
    return PlancherelResult(float(lhs), rhs, float(abs(lhs - rhs) / rhs), tail,
                            float(_hole_estimate(interp, hole)))


def _hole_estimate(interp, hole):
    lh = math.log(hole)
    total = 0.0
    for sgn in (1.0, -1.0):
        b1, b2 = interp(np.array([sgn * hole, sgn * 10.0 * hole]))
        alpha = (b2 - b1) / math.log(10.0)
        beta = b1 - alpha * lh
        # int_0^h (alpha log x + beta)^2 dx
        total += hole * (alpha**2 * (lh * lh - 2.0 * lh + 2.0) + 2.0 * alpha * beta * (lh - 1.0) + beta**2)
    return total


__all__ = [
    "DomainError", "WindowSpec", "TransformValue", "TransformInterpolant", "PlancherelResult",
    "bump_step", "bump_step_prime", "window_eval", "window_derivative", "window_l2_norm",
    "transform_d", "transform_f", "transform_values_direct", "plancherel_check",
    "QuadratureAccuracyError",
]
