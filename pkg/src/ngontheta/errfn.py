"""Generalized error functions E1, E2, E3.

E_q(c_1..c_q; x) is the average of sgn(y,c_1)...sgn(y,c_q) against the
unit-mass Gaussian centered at pr_z(x) on the negative q-plane
z = span(c_1..c_q).  In orthonormalized plane coordinates the density is
exp(-pi |t - u|^2); the plane is cut by the hyperplanes (y,c_k)=0 into
sign-constant cones, and each cone mass is computed with the radial
integral in closed form and adaptive quadrature over the angular
variable(s).  Values lie in [-1,1] and tend to the product of signs as
x grows along a regular direction.
"""

import math
from itertools import product

import numpy as np
from scipy.integrate import quad, dblquad
from scipy.special import erf, erfc, erfcx

from .qspace import NegativePlane, DegeneratePlaneError, DEFAULT_TOL, rat, vec

SQPI = math.sqrt(math.pi)
# beyond this sign-margin the Gaussian tail is < erfc(7.5*sqrt(pi)) ~ 1e-78
FAST_MARGIN = 7.5


class QuadratureError(RuntimeError):
    pass


def E1(space, c, x):
    """erf(sqrt(pi) * (x, c/|(c,c)|^{1/2})) for a negative vector c."""
    und = space.unit_negative(c)
    t = space.inner_f(x, und)
    return float(erf(SQPI * t))


def _radial_1(e0, b):
    """exp(e0) * exp(pi b^2) * I1(b) with I1(b) = integral_0^inf r exp(-pi (r-b)^2) dr,
    computed without overflow for e0 <= ~700."""
    if b >= 0:
        return math.exp(e0) * b * (1.0 + erf(SQPI * b)) / 2.0 \
            + math.exp(e0 - math.pi * b * b) / (2.0 * math.pi)
    return math.exp(e0 - math.pi * b * b) * \
        (1.0 / (2.0 * math.pi) - (-b / 2.0) * erfcx(SQPI * (-b)))


def _radial_2(e0, b):
    """exp(e0) * exp(pi b^2) * I2(b) with I2(b) = integral_0^inf r^2 exp(-pi (r-b)^2) dr."""
    if b >= 0:
        return math.exp(e0) * (1.0 / (4.0 * math.pi) + b * b / 2.0) * (1.0 + erf(SQPI * b)) \
            + math.exp(e0 - math.pi * b * b) * b / (2.0 * math.pi)
    return math.exp(e0 - math.pi * b * b) * \
        (b / (2.0 * math.pi)
         + (1.0 / (4.0 * math.pi) + b * b / 2.0) * erfcx(SQPI * (-b)))


def cone_mass_2d(u, g1, g2, amp=0.0, epsabs=1e-13):
    """exp(amp) times the Gaussian mass exp(-pi|t-u|^2) of the planar cone
    spanned by g1, g2 (angular extent < pi)."""
    th1 = math.atan2(g1[1], g1[0])
    th2 = math.atan2(g2[1], g2[0])
    dth = (th2 - th1) % (2.0 * math.pi)
    if dth > math.pi:
        th1, th2 = th2, th1
        dth = 2.0 * math.pi - dth
    uu = float(u[0] * u[0] + u[1] * u[1])

    def f(th):
        b = u[0] * math.cos(th) + u[1] * math.sin(th)
        return _radial_1(amp - math.pi * (uu - b * b), b)

    val, err = quad(f, th1, th1 + dth, epsabs=epsabs, epsrel=1e-11, limit=200)
    if not math.isfinite(val):
        raise QuadratureError("2-D cone mass quadrature produced non-finite value")
    return val


def cone_dist2(u, gens):
    """Squared distance from u to the cone spanned by the columns of gens
    (0 if u lies inside).  Used for cheap skip bounds; a slight
    underestimate is fine there, so we use 0-inside / min-over-rays."""
    gens = np.asarray(gens, dtype=float)
    lam, *_ = np.linalg.lstsq(gens, np.asarray(u, dtype=float), rcond=None)
    if np.all(lam >= -1e-12):
        return 0.0
    best = float(np.dot(u, u))
    for k in range(gens.shape[1]):
        g = gens[:, k]
        g = g / np.linalg.norm(g)
        proj = max(float(np.dot(u, g)), 0.0)
        d = np.asarray(u, dtype=float) - proj * g
        best = min(best, float(np.dot(d, d)))
    return best


def _plane_setup(space, cs, x, tol):
    """Orthonormalize span(cs); return (functional rows a_k, center u)."""
    plane = NegativePlane(space, cs, tol)
    k = len(cs)
    a = np.empty((k, k))
    for i, c in enumerate(cs):
        cf = np.array([float(v) for v in c])
        # (y, c) for y = sum t_i u_i equals t . a_i, with a_i[k] = (u_k, c)
        a[i] = plane.ortho @ space.gram_f @ cf
    u = plane.coords(np.asarray(x, dtype=float))
    return a, u


def _proportional(c1, c2):
    """Exact proportionality test for rational vectors; returns the sign of
    the ratio or None."""
    c1, c2 = vec(c1), vec(c2)
    i = next((k for k, v in enumerate(c1) if v != 0), None)
    if i is None:
        return None
    if c2[i] == 0:
        return None
    lam = c2[i] / c1[i]
    if all(b == lam * a for a, b in zip(c1, c2)):
        return 1 if lam > 0 else -1
    return None


def E2(space, c1, c2, x, tol=DEFAULT_TOL):
    """Gaussian-averaged sgn(y,c1)sgn(y,c2) over span(c1,c2)."""
    prop = _proportional(c1, c2)
    if prop is not None:
        return float(prop)
    a, u = _plane_setup(space, (vec(c1), vec(c2)), x, tol)
    margins = (a @ u) / np.linalg.norm(a, axis=1)
    if np.min(np.abs(margins)) >= FAST_MARGIN:
        return float(np.prod(np.sign(a @ u)))
    total = 0.0
    for s1, s2 in product((1.0, -1.0), repeat=2):
        b = np.array([s1 * a[0], s2 * a[1]])
        gens = np.linalg.inv(b)
        total += s1 * s2 * cone_mass_2d(u, gens[:, 0], gens[:, 1],
                                        epsabs=tol.quadrature_target * 1e-3)
    return min(1.0, max(-1.0, total))


def cone_mass_3d(u, gens, amp=0.0, epsabs=1e-11):
    """exp(amp) times the Gaussian mass of the solid cone spanned by the
    three columns of gens (spherical-triangle angular quadrature)."""
    v = np.asarray(gens, dtype=float).copy()
    for k in range(3):
        v[:, k] /= np.linalg.norm(v[:, k])
    jac = abs(float(np.linalg.det(v)))
    if jac < 1e-14:
        raise QuadratureError("degenerate spherical triangle")
    uu = float(np.dot(u, u))

    def f(t, s):
        y = (1.0 - s - t) * v[:, 0] + s * v[:, 1] + t * v[:, 2]
        r = math.sqrt(float(np.dot(y, y)))
        b = float(np.dot(u, y)) / r
        return _radial_2(amp - math.pi * (uu - b * b), b) * jac / (r ** 3)

    val, err = dblquad(f, 0.0, 1.0, 0.0, lambda s: 1.0 - s,
                       epsabs=epsabs, epsrel=1e-9)
    if not math.isfinite(val):
        raise QuadratureError("3-D cone mass quadrature produced non-finite value")
    return val


def E3(space, c1, c2, c3, x, tol=DEFAULT_TOL):
    """Gaussian-averaged sgn(y,c1)sgn(y,c2)sgn(y,c3) over span(c1,c2,c3)."""
    a, u = _plane_setup(space, (vec(c1), vec(c2), vec(c3)), x, tol)
    margins = (a @ u) / np.linalg.norm(a, axis=1)
    if np.min(np.abs(margins)) >= FAST_MARGIN:
        return float(np.prod(np.sign(a @ u)))
    total = 0.0
    for sig in product((1.0, -1.0), repeat=3):
        b = np.array([sig[i] * a[i] for i in range(3)])
        gens = np.linalg.inv(b)
        # skip far-away octants: their mass is below the Gaussian tail bound
        d2 = cone_dist2(u, gens)
        if math.pi * d2 > 42.0:   # e^{-42} << 1e-11
            continue
        total += sig[0] * sig[1] * sig[2] * cone_mass_3d(u, gens, epsabs=epsabs_for(tol))
    return min(1.0, max(-1.0, total))


def epsabs_for(tol):
    return max(tol.quadrature_target * 1e-2, 1e-12)


def j0_value(space, ngon, x):
    """(1/4) sum_j [E2(C_j, C_{j+1}, x*sqrt(2)) - sgn(x,C_j) sgn(x,C_{j+1})]
    for a regular rational x."""
    cs = ngon.cs
    n = len(cs)
    xr = vec(x)
    signs = []
    for c in cs:
        p = space.inner(xr, c)
        if p == 0:
            raise ValueError("x is not regular: (x, C_j) = 0")
        signs.append(1 if p > 0 else -1)
    xf = np.array([float(v) for v in xr]) * math.sqrt(2.0)
    total = 0.0
    for j in range(n):
        total += E2(space, cs[j], cs[(j + 1) % n], xf) \
            - signs[j] * signs[(j + 1) % n]
    return total / 4.0
