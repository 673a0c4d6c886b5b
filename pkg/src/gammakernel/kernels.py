"""Correlation kernels on the half-integer lattice, by four independent routes.

The central objects are the "underline" kernels: the spectral projection of
the second-order difference operator

    D f(x) = sqrt(xi (z+x+1/2)(z'+x+1/2)) f(x+1)
           + sqrt(xi (z+x-1/2)(z'+x-1/2)) f(x-1)
           - [x + xi (z+z'+x)] f(x)

onto the positive part of its spectrum (the pre-limit kernel, 0 < xi < 1), and
its xi -> 1 limit (the Gamma kernel).  Four evaluation methods are provided:

  * underline_limit_integrable -- closed form through Gamma/psi functions;
  * underline_limit_contour    -- double contour integral over hairpin
    contours [+inf - i rho, 0-, +inf + i rho], in two variants ("sum"
    denominator u1+u2+1, and "difference" denominator u1-u2 with rho1 < rho2);
  * underline_prelimit_contour -- double contour integral over origin-centered
    circles, again in "sum" (omega1 omega2 - 1) and "difference"
    (omega1 - omega2, inner second circle) variants;
  * underline_prelimit_spectral -- direct tridiagonal diagonalization on a
    window.

The J-transform converts underline kernels into the kernels of the finitary
process (delta - underline on negative rows, with alternating signs), gauge
transforms conjugate by a diagonal, and weighted_blocks computes the
trace/Hilbert-Schmidt data of A_h K A_h with h(x) = |x|^(-1/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import digamma as _sp_digamma
from scipy.special import loggamma as _sp_loggamma

from .lattice import HalfInt
from .special import digamma, log_gamma, sinpi, trigamma
from .zmeasure import Params, XiParams, pair_product

__all__ = [
    "NonConvergenceError",
    "QuadratureConfig",
    "WindowKernel",
    "window_points",
    "underline_limit_integrable",
    "underline_limit_contour",
    "underline_prelimit_contour",
    "underline_prelimit_spectral",
    "underline_prelimit_window",
    "underline_limit_window",
    "j_transform",
    "gauge_transform",
    "WeightedBlocks",
    "weighted_blocks",
    "density_constant",
    "reflection_sign",
]


class NonConvergenceError(RuntimeError):
    """Adaptive quadrature failed to stabilize within the node cap."""

    def __init__(self, op: str, achieved: float, tol: float, nodes: int):
        super().__init__(
            f"{op}: successive refinements differ by {achieved:.3e} > tol {tol:.3e} "
            f"at the node cap {nodes}"
        )
        self.op = op
        self.achieved = achieved
        self.tol = tol
        self.nodes = nodes


# ---------------------------------------------------------------------------
# Configuration and window containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureConfig:
    """Contour-quadrature parameters.

    nodes: starting node count per ray / per circle (doubled adaptively).
    radius: outer circle radius for pre-limit contours; None selects
        xi**(-1/4), the geometric midpoint of the legal band
        (max(1, sqrt(xi)), 1/sqrt(xi)).
    radius_inner: inner circle radius for the pre-limit "difference" variant;
        None selects (1 + sqrt(xi))/2, inside (sqrt(xi), 1).
    rho1, rho2: imaginary offsets of the limit hairpin contours; rho1 is used
        for single-contour variants, rho1 < rho2 < 1/2 for the "difference"
        variant.
    u_max: truncation of the unbounded hairpin rays.  None picks the smallest
        cutoff whose analytic tail envelope is below tol/10.
    tol: stabilization tolerance for adaptive node doubling.
    max_nodes: hard cap on nodes per ray / per circle.
    """

    nodes: int = 64
    radius: float | None = None
    radius_inner: float | None = None
    rho1: float = 0.2
    rho2: float = 0.4
    u_max: float | None = None
    tol: float = 1e-10
    max_nodes: int = 2**18

    def __post_init__(self) -> None:
        if self.nodes < 8:
            raise ValueError("nodes must be at least 8")
        if not (0.0 < self.rho1 < self.rho2 < 0.5):
            raise ValueError(
                f"need 0 < rho1 < rho2 < 1/2, got rho1={self.rho1}, rho2={self.rho2}"
            )
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.u_max is not None and self.u_max <= 1:
            raise ValueError("u_max must exceed 1")

    def circle_radius(self, xi: float) -> float:
        r = self.radius if self.radius is not None else xi ** (-0.25)
        lo, hi = max(1.0, math.sqrt(xi)), 1.0 / math.sqrt(xi)
        if not (lo < r < hi):
            raise ValueError(
                f"circle radius {r:.6g} outside the legal band ({lo:.6g}, {hi:.6g})"
            )
        return r

    def circle_radius_inner(self, xi: float) -> float:
        r2 = self.radius_inner if self.radius_inner is not None else (1 + math.sqrt(xi)) / 2
        r1 = self.circle_radius(xi)
        lo = math.sqrt(xi)
        hi = min(r1, 1.0 / math.sqrt(xi))
        if not (lo < r2 < hi):
            raise ValueError(
                f"inner circle radius {r2:.6g} outside the legal band ({lo:.6g}, {hi:.6g})"
            )
        return r2


def window_points(N: int) -> tuple[HalfInt, ...]:
    """The 2N half-integers of the symmetric window [-N, N], ascending."""
    if N < 1:
        raise ValueError("window half-width must be a positive integer")
    return tuple(HalfInt(t) for t in range(-2 * N + 1, 2 * N, 2))


_UNDERLINE_KINDS = ("underline_prelimit", "underline_limit")
_K_KINDS = ("k_prelimit", "k_limit")


@dataclass
class WindowKernel:
    """A kernel restricted to the window Z' in [-N, N], stored densely.

    values[i, j] is the kernel at (points[i], points[j]) with points ascending.
    kind is one of 'underline_prelimit', 'underline_limit' (symmetric
    projection-type kernels), 'k_prelimit', 'k_limit' (their J-transforms).
    xi is the pre-limit parameter, None for limit kinds.
    """

    N: int
    kind: str
    values: np.ndarray
    params: Params
    xi: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _UNDERLINE_KINDS + _K_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (2 * self.N, 2 * self.N):
            raise ValueError(
                f"values must be {2 * self.N}x{2 * self.N} for N={self.N}, got {vals.shape}"
            )
        self.values = vals
        if ("prelimit" in self.kind) != (self.xi is not None):
            raise ValueError("xi must be set exactly for pre-limit kinds")

    @property
    def points(self) -> tuple[HalfInt, ...]:
        return window_points(self.N)

    def index_of(self, x: HalfInt) -> int:
        x = HalfInt.make(x)
        i = (x.twice + 2 * self.N - 1) // 2
        if not (0 <= i < 2 * self.N):
            raise KeyError(f"{x} outside window [-{self.N}, {self.N}]")
        return i

    def entry(self, x, y) -> float:
        return float(self.values[self.index_of(x), self.index_of(y)])

    def submatrix(self, pts: Iterable) -> np.ndarray:
        idx = [self.index_of(t) for t in pts]
        return self.values[np.ix_(idx, idx)]

    def minor(self, pts: Iterable) -> float:
        """Principal minor det K(x_i, x_j) over the given points."""
        sub = self.submatrix(pts)
        if sub.size == 0:
            return 1.0
        return float(np.linalg.det(sub))

    def crop(self, N: int) -> "WindowKernel":
        """Restriction to the smaller symmetric window [-N, N]."""
        if N > self.N:
            raise ValueError(f"cannot crop window {self.N} to larger {N}")
        k = self.N - N
        return replace(
            self,
            N=N,
            values=self.values[k : k + 2 * N, k : k + 2 * N].copy(),
            meta=dict(self.meta, cropped_from=self.N),
        )


# ---------------------------------------------------------------------------
# Route 1: integrable closed form for the limit kernel
# ---------------------------------------------------------------------------

def _gamma_sign_real(t: float) -> float:
    """Sign of Gamma(t) for real non-integer t."""
    if t > 0:
        return 1.0
    return -1.0 if math.floor(-t) % 2 == 0 else 1.0


def underline_limit_integrable(x, y, p: Params) -> float:
    """The limit (Gamma) kernel via its Gamma/psi closed form.

    Evaluated in a cancellation-free real arrangement per parameter branch:
    for conjugate non-real parameters through arg Gamma, for distinct real
    parameters through log|Gamma| differences with explicit Gamma signs, and
    for equal real parameters through psi/psi' carrying the same signs (the
    sign pair is what the distinct-parameter form degenerates to).
    """
    x = HalfInt.make(x)
    y = HalfInt.make(y)
    z, zp = p.z, p.z_prime
    xv, yv = float(x), float(y)
    if p.series == "principal":
        b = z.imag
        s2 = abs(sinpi(z)) ** 2
        if x == y:
            im_psi = digamma(z + xv + 0.5).imag
            return 2.0 * s2 * im_psi / (math.pi * math.sinh(2 * math.pi * b))
        th_x = log_gamma(z + xv + 0.5).imag
        th_y = log_gamma(z + yv + 0.5).imag
        return (
            2.0 * s2 * math.sin(th_x - th_y)
            / (math.pi * math.sinh(2 * math.pi * b) * (xv - yv))
        )
    zr, zpr = z.real, zp.real
    if zr == zpr:
        c = (sinpi(zr).real / math.pi) ** 2
        if x == y:
            return c * trigamma(zr + xv + 0.5).real
        cx = _gamma_sign_real(zr + xv + 0.5)
        cy = _gamma_sign_real(zr + yv + 0.5)
        num = _sp_digamma(zr + xv + 0.5) - _sp_digamma(zr + yv + 0.5)
        return c * cx * cy * float(num) / (xv - yv)
    s = (sinpi(zr) * sinpi(zpr) / (math.pi * sinpi(zr - zpr))).real
    if x == y:
        num = _sp_digamma(zr + xv + 0.5) - _sp_digamma(zpr + xv + 0.5)
        return s * float(num)
    dx = 0.5 * (math.lgamma(zr + xv + 0.5) - math.lgamma(zpr + xv + 0.5))
    dy = 0.5 * (math.lgamma(zr + yv + 0.5) - math.lgamma(zpr + yv + 0.5))
    cx = _gamma_sign_real(zr + xv + 0.5)
    cy = _gamma_sign_real(zr + yv + 0.5)
    return s * cx * cy * 2.0 * math.sinh(dx - dy) / (xv - yv)


def underline_limit_window(N: int, p: Params) -> WindowKernel:
    """Window kernel of the limit kernel, vectorized over the integrable form."""
    pts = window_points(N)
    xv = np.array([float(t) for t in pts])
    z, zp = p.z, p.z_prime
    n = len(xv)
    diff = xv[:, None] - xv[None, :]
    off = ~np.eye(n, dtype=bool)
    np.fill_diagonal(diff, 1.0)  # diagonal is overwritten below
    vals = np.empty((n, n))
    if p.series == "principal":
        b = z.imag
        s2 = abs(sinpi(z)) ** 2
        theta = np.imag(_sp_loggamma(z + xv + 0.5))
        denom = math.pi * math.sinh(2 * math.pi * b)
        vals[off] = (np.sin(theta[:, None] - theta[None, :]) / diff)[off]
        np.fill_diagonal(vals, np.imag(_sp_digamma(z + xv + 0.5 + 0j)))
        vals *= 2.0 * s2 / denom
    elif z.real == zp.real:
        zr = z.real
        c = (sinpi(zr).real / math.pi) ** 2
        psi = _sp_digamma(zr + xv + 0.5)
        sg = np.array([_gamma_sign_real(zr + t + 0.5) for t in xv])
        vals[off] = (
            (sg[:, None] * sg[None, :]) * (psi[:, None] - psi[None, :]) / diff
        )[off]
        np.fill_diagonal(vals, [trigamma(zr + t + 0.5).real for t in xv])
        vals *= c
    else:
        zr, zpr = z.real, zp.real
        s = (sinpi(zr) * sinpi(zpr) / (math.pi * sinpi(zr - zpr))).real
        lg = np.array([math.lgamma(zr + t + 0.5) - math.lgamma(zpr + t + 0.5) for t in xv])
        sg = np.array([_gamma_sign_real(zr + t + 0.5) for t in xv])
        delta = 0.5 * lg
        vals[off] = (
            (sg[:, None] * sg[None, :]) * 2.0 * np.sinh(delta[:, None] - delta[None, :]) / diff
        )[off]
        psi_diff = _sp_digamma(zr + xv + 0.5) - _sp_digamma(zpr + xv + 0.5)
        np.fill_diagonal(vals, psi_diff)
        vals *= s
    return WindowKernel(N=N, kind="underline_limit", values=vals, params=p, xi=None)


# ---------------------------------------------------------------------------
# Gamma prefactor shared by all contour representations
# ---------------------------------------------------------------------------

def _gamma_prefactor(x: float, y: float, p: Params) -> complex:
    """Gamma(-z'-x+1/2) Gamma(-z-y+1/2) divided by the positive square root of
    Gamma(-z-x+1/2) Gamma(-z'-x+1/2) Gamma(-z-y+1/2) Gamma(-z'-y+1/2);
    assembled in log space (the four-factor product is strictly positive for
    admissible parameters, so its square root is exp of half the real part)."""
    z, zp = p.z, p.z_prime
    lg_num = log_gamma(-zp - x + 0.5) + log_gamma(-z - y + 0.5)
    lg_den = (
        log_gamma(-z - x + 0.5)
        + log_gamma(-zp - x + 0.5)
        + log_gamma(-z - y + 0.5)
        + log_gamma(-zp - y + 0.5)
    )
    return cmath.exp(lg_num - 0.5 * lg_den.real)


def _snap_real(value: complex, tol: float, op: str) -> float:
    scale = max(1.0, abs(value.real))
    limit = max(1e-9, 50.0 * tol) * scale
    if abs(value.imag) > limit:
        raise NonConvergenceError(op + " (imaginary residue)", abs(value.imag), limit, 0)
    return value.real


# ---------------------------------------------------------------------------
# Route 2: limit kernel via hairpin contour integrals
# ---------------------------------------------------------------------------

def _hairpin_nodes(
    rho: float, n_ray: int, u_max: float, slope: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes/weights for the contour [+inf-i rho, 0-, +inf+i rho].

    Rays use the double-exponential map t = exp(pi sinh(tau)) on (0, u_max)
    (geometric convergence for power-law integrands); the semicircle around 0
    uses Gauss-Legendre.  Weights include the complex line element and the
    traversal orientation: the lower ray runs from infinity to 0, the
    semicircle clockwise from -i rho through -rho to +i rho, the upper ray
    from 0 to infinity.

    slope > 0 tilts the rays outward, u = t +- i (rho + slope*t): a legal
    deformation (no branch cuts or poles are crossed and the integrand decays
    at infinity) used for the outer contour of nested pairs so that the
    distance between the contours grows with t and the coupled denominator
    stays resolvable on the double-exponential grid.
    """
    tau_max = 3.9
    h = 2.0 * tau_max / n_ray
    k = np.arange(-(n_ray // 2), n_ray // 2 + 1)
    tau = k * h
    t = np.exp(np.pi * np.sinh(tau))
    dt = h * np.pi * np.cosh(tau) * t
    keep = (t > 0) & (t <= u_max) & np.isfinite(dt)
    t, dt = t[keep], dt[keep]

    lower_u = t - 1j * (rho + slope * t)
    lower_w = -(1.0 - 1j * slope) * dt  # traversed from +inf to 0
    upper_u = t + 1j * (rho + slope * t)
    upper_w = (1.0 + 1j * slope) * dt

    gl_n = max(16, n_ray // 4)
    gx, gw = np.polynomial.legendre.leggauss(gl_n)
    # theta from -pi/2 down to -3pi/2 (clockwise through the negative axis)
    a, b = -0.5 * math.pi, -1.5 * math.pi
    theta = 0.5 * (a + b) + 0.5 * (b - a) * gx
    w_theta = 0.5 * (b - a) * gw
    arc_u = rho * np.exp(1j * theta)
    arc_w = 1j * arc_u * w_theta

    u = np.concatenate([lower_u, arc_u, upper_u])
    w = np.concatenate([lower_w, arc_w, upper_w])
    return u, w


def _log_factor(u: np.ndarray, alpha: complex, beta: complex) -> np.ndarray:
    """(-u)^alpha (1+u)^beta with the hairpin branch conventions: principal
    logarithms are exact because -u never meets (-inf, 0] and 1+u stays in the
    right half-plane on the contour."""
    return np.exp(alpha * np.log(-u) + beta * np.log1p(u))


def _coupled_sum(
    a: np.ndarray, b: np.ndarray, u1: np.ndarray, u2: np.ndarray, mode: str
) -> complex:
    """sum_{i,j} a_i b_j / denom(u1_i, u2_j), chunked to bound memory."""
    total = 0.0 + 0.0j
    chunk = max(1, 2**22 // max(len(u2), 1))
    for s in range(0, len(u1), chunk):
        u1c = u1[s : s + chunk, None]
        if mode == "sum":
            denom = u1c + u2[None, :] + 1.0
        else:
            denom = u1c - u2[None, :]
        total += np.sum(a[s : s + chunk, None] * b[None, :] / denom)
    return complex(total)


def _auto_u_max(tail_exp: float, tol: float) -> float:
    """Smallest ray cutoff U whose analytic tail envelope
    U^tail_exp / (-tail_exp) falls below tol/10 (tail_exp < 0).  Returns inf
    (no truncation) when the decay is too slow for any reachable cutoff."""
    if tail_exp >= -0.05:
        return math.inf
    u = (0.1 * tol * (-tail_exp)) ** (1.0 / tail_exp)
    u = max(1e12, u)
    return u if u < 1e33 else math.inf


def underline_limit_contour(
    x,
    y,
    p: Params,
    q: QuadratureConfig | None = None,
    variant: str = "auto",
    full_output: bool = False,
):
    """The limit kernel via the double hairpin-contour integral.

    variant='sum' uses the representation with denominator u1+u2+1 (equal
    contour offsets rho1); variant='difference' uses the denominator u1-u2
    with offsets rho1 < rho2; 'auto' picks 'difference' for mixed-sign
    (positive, negative) pairs and 'sum' otherwise.  Node counts double from
    q.nodes until the value stabilizes within q.tol.
    """
    q = q or QuadratureConfig()
    x = HalfInt.make(x)
    y = HalfInt.make(y)
    if variant not in ("auto", "sum", "difference"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "auto":
        if float(x) < 0 < float(y):
            x, y = y, x  # the kernel is symmetric
        variant = "difference" if float(x) > 0 > float(y) else "sum"
    xv, yv = float(x), float(y)
    z, zp = p.z, p.z_prime
    mu = (zp - z).real

    a1 = zp + xv - 0.5
    b1 = -z - xv - 0.5
    if variant == "sum":
        a2, b2 = z + yv - 0.5, -zp - yv - 0.5
        rho_1 = rho_2 = q.rho1
        decay2 = mu - 1.0
        mode = "sum"
    else:
        a2, b2 = -zp - yv - 0.5, z + yv - 0.5
        rho_1, rho_2 = q.rho1, q.rho2
        decay2 = -mu - 1.0
        mode = "difference"
    decay1 = mu - 1.0
    umax1 = q.u_max if q.u_max is not None else _auto_u_max(decay1, q.tol)
    umax2 = q.u_max if q.u_max is not None else _auto_u_max(decay2, q.tol)

    slope2 = 0.5 if mode == "difference" else 0.0
    pref = _gamma_prefactor(xv, yv, p)
    n = q.nodes
    prev = None
    achieved = math.inf
    while True:
        u1, w1 = _hairpin_nodes(rho_1, n, umax1)
        u2, w2 = _hairpin_nodes(rho_2, n, umax2, slope=slope2)
        f1 = _log_factor(u1, a1, b1) * w1
        f2 = _log_factor(u2, a2, b2) * w2
        integral = _coupled_sum(f1, f2, u1, u2, mode) / (2j * math.pi) ** 2
        val = pref * integral
        if prev is not None:
            achieved = abs(val - prev)
            if achieved <= q.tol * max(1.0, abs(val)):
                break
        prev = val
        n *= 2
        if n > q.max_nodes:
            raise NonConvergenceError("underline_limit_contour", achieved, q.tol, n // 2)
    # Analytic envelope estimate for the truncated ray tails.
    tail = 0.0
    for umax, decay in ((umax1, decay1), (umax2, decay2)):
        if math.isfinite(umax) and decay < -1e-12:
            tail += abs(pref) * umax ** decay / (-decay)
    result = _snap_real(val, q.tol, "underline_limit_contour")
    if full_output:
        info = {
            "nodes_per_contour": len(u1),
            "variant": mode,
            "tail_bound": tail,
            "last_increment": achieved,
        }
        return result, info
    return result


# ---------------------------------------------------------------------------
# Route 3: pre-limit kernel via circle contour integrals
# ---------------------------------------------------------------------------

def _circle_nodes(radius: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes and weights (including d omega) on a positively
    oriented origin-centered circle."""
    theta = 2.0 * math.pi * np.arange(n) / n
    om = radius * np.exp(1j * theta)
    w = (2j * math.pi / n) * om
    return om, w


def _circle_factor(
    om: np.ndarray, sq: float, alpha: complex, beta: complex, power: int
) -> np.ndarray:
    """(1 - sq*om)^alpha (1 - sq/om)^beta om^power on a legal circle, where
    both bases have positive real part so principal logarithms implement the
    required branches."""
    return np.exp(
        alpha * np.log1p(-sq * om) + beta * np.log1p(-sq / om)
    ) * om ** float(power)


def underline_prelimit_contour(
    x,
    y,
    p: XiParams,
    q: QuadratureConfig | None = None,
    variant: str = "auto",
    full_output: bool = False,
):
    """The pre-limit kernel via the double contour integral over circles.

    variant='sum' integrates over two circles of the same radius with
    denominator omega1*omega2 - 1; variant='difference' uses denominator
    omega1 - omega2 with the second circle strictly inside the first.
    Trapezoid rule is spectrally accurate here; node counts double from
    q.nodes until stabilization within q.tol.
    """
    q = q or QuadratureConfig()
    x = HalfInt.make(x)
    y = HalfInt.make(y)
    if variant not in ("auto", "sum", "difference"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "auto":
        if float(x) < 0 < float(y):
            x, y = y, x  # symmetric kernel
        variant = "difference" if float(x) > 0 > float(y) else "sum"
    xv, yv = float(x), float(y)
    z, zp, xi = p.z, p.z_prime, p.xi
    sq = math.sqrt(xi)
    r1 = q.circle_radius(xi)

    # omega powers are integers: single-valued, no branch issues.
    pow1 = -(x.twice + 1) // 2
    a1, b1 = zp + xv - 0.5, -z - xv - 0.5
    if variant == "sum":
        r2 = r1
        a2, b2 = z + yv - 0.5, -zp - yv - 0.5
        pow2 = -(y.twice + 1) // 2
        mode = "sum_circle"
    else:
        r2 = q.circle_radius_inner(xi)
        a2, b2 = -zp - yv - 0.5, z + yv - 0.5
        pow2 = (y.twice - 1) // 2
        mode = "difference"

    pref = _gamma_prefactor(xv, yv, p.base) * (1.0 - xi)
    n = q.nodes
    prev = None
    achieved = math.inf
    while True:
        om1, w1 = _circle_nodes(r1, n)
        om2, w2 = _circle_nodes(r2, n)
        f1 = _circle_factor(om1, sq, a1, b1, pow1) * w1
        f2 = _circle_factor(om2, sq, a2, b2, pow2) * w2
        if mode == "sum_circle":
            total = 0.0 + 0.0j
            chunk = max(1, 2**22 // n)
            for s in range(0, n, chunk):
                denom = om1[s : s + chunk, None] * om2[None, :] - 1.0
                total += np.sum(f1[s : s + chunk, None] * f2[None, :] / denom)
            integral = complex(total)
        else:
            integral = _coupled_sum(f1, f2, om1, om2, "difference")
        val = pref * integral / (2j * math.pi) ** 2
        if prev is not None:
            achieved = abs(val - prev)
            if achieved <= q.tol * max(1.0, abs(val)):
                break
        prev = val
        n *= 2
        if n > q.max_nodes:
            raise NonConvergenceError(
                "underline_prelimit_contour", achieved, q.tol, n // 2
            )
    result = _snap_real(val, q.tol, "underline_prelimit_contour")
    if full_output:
        info = {"nodes_per_circle": n, "variant": mode, "last_increment": achieved}
        return result, info
    return result


# ---------------------------------------------------------------------------
# Route 4: pre-limit kernel via tridiagonal spectral projection
# ---------------------------------------------------------------------------

def _difference_operator(N: int, p: XiParams) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the difference operator on the window."""
    pts = window_points(N)
    xv = np.array([float(t) for t in pts])
    s = (p.z + p.z_prime).real
    diag = -(xv + p.xi * (s + xv))
    shifts = [(t.twice + 1) // 2 for t in pts[:-1]]  # x + 1/2 as integers
    off = np.sqrt([p.xi * pair_product(p.z, p.z_prime, m) for m in shifts])
    return diag, off


def underline_prelimit_spectral(N: int, p: XiParams) -> WindowKernel:
    """Projection onto the positive eigenvalues of the difference operator
    truncated to the window [-N, N].

    Interior entries approximate the pre-limit kernel; accuracy decays toward
    the window boundary (use underline_prelimit_window for certified interior
    values).
    """
    if N < 4:
        raise ValueError("spectral window needs N >= 4")
    diag, off = _difference_operator(N, p)
    # The spectrum approximates (1-xi)Z', so eigenvalues cluster tightly for
    # xi near 1; the MRRR driver handles those clusters in O(n^2) where the
    # default bisection + inverse-iteration path degrades badly.
    w, v = eigh_tridiagonal(diag, off, lapack_driver="stemr")
    vp = v[:, w > 0.0]
    proj = vp @ vp.T
    meta = {"positive_eigenvalues": int(vp.shape[1])}
    return WindowKernel(
        N=N, kind="underline_prelimit", values=proj, params=p.base, xi=p.xi, meta=meta
    )


def _spectral_center(N: int, M: int, p: XiParams) -> tuple[np.ndarray, int]:
    """Center [-N, N] block of the window-[-M, M] spectral projection.

    Only the center rows of the positive eigenvectors enter the cropped
    block, so the full M-window projection matrix is never formed.
    """
    diag, off = _difference_operator(M, p)
    w, v = eigh_tridiagonal(diag, off, lapack_driver="stemr")
    rows = v[M - N : M + N, w > 0.0]
    return rows @ rows.T, rows.shape[1]


def underline_prelimit_window(
    N: int,
    p: XiParams,
    tol: float = 1e-9,
    max_pad: int = 1 << 13,
) -> WindowKernel:
    """Pre-limit kernel on [-N, N] with certified interior accuracy.

    Diagonalizes on padded windows [-M, M], keeping the center block and
    doubling the padding until it stabilizes below tol (the projection
    kernel of the full lattice operator is approximated by window projections
    with boundary effects decaying into the interior).
    """
    pad = max(16, N // 2, math.ceil(1.0 / (1.0 - p.xi)))
    prev, _ = _spectral_center(N, N + pad, p)
    while True:
        pad *= 2
        if N + pad > max_pad:
            raise NonConvergenceError("underline_prelimit_window", math.inf, tol, N + pad)
        cur, rank = _spectral_center(N, N + pad, p)
        residual = float(np.max(np.abs(cur - prev)))
        if residual <= tol:
            return WindowKernel(
                N=N,
                kind="underline_prelimit",
                values=cur,
                params=p.base,
                xi=p.xi,
                meta={
                    "positive_eigenvalues": rank,
                    "padding": pad,
                    "padding_residual": residual,
                },
            )
        prev = cur


# ---------------------------------------------------------------------------
# Transforms and block data
# ---------------------------------------------------------------------------

def epsilon_sign(x: HalfInt) -> float:
    """The sign function: 1 on positive half-integers, (-1)^(|x|-1/2) below."""
    x = HalfInt.make(x)
    if x.twice > 0:
        return 1.0
    return -1.0 if ((-x.twice - 1) // 2) % 2 else 1.0


def j_transform(wk: WindowKernel) -> WindowKernel:
    """Convert an underline kernel into the kernel of the finitary process:

        eps(x) K(x,y) eps(y) = underline(x,y)            for x > 0,
        eps(x) K(x,y) eps(y) = delta_xy - underline(x,y) for x < 0,

    with eps = 1 on positives and alternating signs on negatives.  The
    result is J-symmetric: K(x,y) = K(y,x) for same-side pairs and
    K(x,y) = -K(y,x) for mixed pairs.
    """
    if wk.kind not in _UNDERLINE_KINDS:
        raise ValueError(f"j_transform requires an underline kernel, got {wk.kind!r}")
    pts = wk.points
    eps = np.array([epsilon_sign(t) for t in pts])
    neg = np.array([t.twice < 0 for t in pts])
    inner = wk.values.copy()
    inner[neg, :] *= -1.0
    inner[neg, neg] += 1.0
    out = inner * eps[:, None] * eps[None, :]
    kind = "k_prelimit" if wk.kind == "underline_prelimit" else "k_limit"
    return WindowKernel(
        N=wk.N, kind=kind, values=out, params=wk.params, xi=wk.xi, meta=dict(wk.meta)
    )


def gauge_transform(wk: WindowKernel, phi: Callable[[HalfInt], float]) -> WindowKernel:
    """Conjugate by a non-vanishing diagonal: phi(x) K(x,y) / phi(y).
    All principal minors (hence all correlation functions) are unchanged."""
    pts = wk.points
    d = np.array([float(phi(t)) for t in pts])
    if np.any(d == 0.0) or not np.all(np.isfinite(d)):
        raise ValueError("gauge function must be finite and non-vanishing on the window")
    vals = wk.values * (d[:, None] / d[None, :])
    return WindowKernel(
        N=wk.N, kind=wk.kind, values=vals, params=wk.params, xi=wk.xi,
        meta=dict(wk.meta, gauged=True),
    )


@dataclass
class WeightedBlocks:
    """Blocks and norms of A_h K A_h with h(x) = |x|^(-1/2) on a window.

    pp/mm are the (positive, positive) and (negative, negative) blocks, pm/mp
    the mixed ones, indexed by the window's positive points ascending and
    negative points ascending.  trace_* are plain traces, trace_norm_* nuclear
    norms, hs_* Hilbert-Schmidt (Frobenius) norms.
    """

    pp: np.ndarray
    pm: np.ndarray
    mp: np.ndarray
    mm: np.ndarray
    trace_pp: float
    trace_mm: float
    trace_norm_pp: float
    trace_norm_mm: float
    hs_pm: float
    hs_mp: float


def weighted_blocks(wk: WindowKernel) -> WeightedBlocks:
    """Form A_h K A_h, h(x) = |x|^(-1/2), and return its four blocks with
    trace data (diagonal blocks) and Hilbert-Schmidt norms (mixed blocks)."""
    if wk.kind not in _K_KINDS:
        raise ValueError(f"weighted_blocks requires a K-kind kernel, got {wk.kind!r}")
    pts = wk.points
    h = np.array([1.0 / math.sqrt(abs(float(t))) for t in pts])
    a = wk.values * h[:, None] * h[None, :]
    pos = np.array([t.twice > 0 for t in pts])
    neg = ~pos
    pp = a[np.ix_(pos, pos)]
    pm = a[np.ix_(pos, neg)]
    mp = a[np.ix_(neg, pos)]
    mm = a[np.ix_(neg, neg)]
    return WeightedBlocks(
        pp=pp,
        pm=pm,
        mp=mp,
        mm=mm,
        trace_pp=float(np.trace(pp)),
        trace_mm=float(np.trace(mm)),
        trace_norm_pp=float(np.sum(np.linalg.svd(pp, compute_uv=False))),
        trace_norm_mm=float(np.sum(np.linalg.svd(mm, compute_uv=False))),
        hs_pm=float(np.linalg.norm(pm)),
        hs_mp=float(np.linalg.norm(mp)),
    )


def density_constant(p: Params) -> float:
    """The constant C(z, z') in the density asymptotics rho_1(x) ~ C/|x|:
    sin(pi z) sin(pi z') (z - z') / (pi sin(pi (z - z'))) for z != z', and
    (sin(pi z)/pi)^2 for equal real parameters."""
    z, zp = p.z, p.z_prime
    if z == zp:
        return float((sinpi(z).real / math.pi) ** 2)
    val = sinpi(z) * sinpi(zp) * (z - zp) / (math.pi * sinpi(z - zp))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise AssertionError(f"density constant should be real, got {val}")
    if val.real <= 0:
        raise AssertionError(f"density constant should be positive, got {val.real}")
    return float(val.real)


def reflection_sign(x, y) -> float:
    """Sign in the reflection symmetry K_params(x, y) = sign * K_neg_params(-x, -y):
    +1 when x and y lie on the same side of 0, -1 for mixed pairs."""
    same = (HalfInt.make(x).twice > 0) == (HalfInt.make(y).twice > 0)
    return 1.0 if same else -1.0
