"""Lattice coset enumeration under majorant ellipsoids, holomorphic
q-expansions, numerical evaluation of the non-holomorphic completion, and
finite-Weil-representation modularity checks.

Enumeration is certified in two steps: a comparability constant kappa is
measured on planes sampled along the polygon boundary, giving the bound
(x,x)_{z0} <= kappa * (x,x) for every x whose kernel value can be nonzero
(such x satisfy (x,x) = (x,x)_{z*} for some plane z* on a spanning surface);
then a guard band above the bound is enumerated and must contain no x with
nonzero kernel — otherwise kappa is doubled and the run retried.
"""

import math
import os
import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import eigh
from scipy.special import erfcx, gammaincc, gamma as gamma_fn

from .qspace import (QuadraticSpace, NegativePlane, mat_inv, mat_det, rat,
                     vec, vec_scale)
from .ngon import w_invariant, epsilon, vertex_plane, gamma_sample

AMP_CAP = 600.0          # exponent cap keeping corrupted kernels finite
CHUNK = 1024             # fixed accumulation chunk size (thread-count invariant)
RHO_LOG_TOL = -34.0      # skip cone-mass terms below e^{RHO_LOG_TOL}


def thread_count():
    try:
        return max(1, int(os.environ.get("NGON_THETA_THREADS", "1")))
    except ValueError:
        return 1


class CertificationError(RuntimeError):
    pass


class LatticeCoset:
    """Integral lattice Z^m with Gram matrix from `space`, coset mu in L∨/L."""

    def __init__(self, space, mu=None):
        self.space = space
        m = space.dim
        if any(v.denominator != 1 for row in space.gram for v in row):
            raise ValueError("lattice Gram matrix must be integral")
        self.mu = vec(mu) if mu is not None else vec([0] * m)
        gm = [[int(v) for v in row] for row in space.gram]
        gmu = np.array(gm, dtype=object) @ np.array(
            [self.mu[i] for i in range(m)], dtype=object)
        if any(Fraction(v).denominator != 1 for v in gmu):
            raise ValueError("mu is not in the dual lattice")

    def is_even(self):
        return all(self.space.gram[i][i] % 2 == 0 for i in range(self.space.dim))


def disc_group(space):
    """Sorted coset representatives of L∨/L, each with entries in [0,1)."""
    m = space.dim
    gi = [[int(v) for v in row] for row in space.gram]
    det = mat_det(gi)
    d = abs(int(det))
    adj = [[int(v * det) for v in row] for row in mat_inv(gi)]  # adjugate * sign
    adj = np.array(adj, dtype=np.int64)
    # mu = G^{-1} k mod Z^m for k over (Z/d)^m; G^{-1} = adj(G)/det(G)
    ks = np.indices((d,) * m).reshape(m, -1).T
    nums = (ks @ adj.T * int(np.sign(float(det)))) % d
    nums = np.unique(nums, axis=0)
    reps = sorted(tuple(Fraction(int(v), d) for v in row) for row in nums)
    assert len(reps) == d, "dual group size must equal |det|"
    return reps


def majorant_matrix(space, z0_span):
    """Exact positive-definite matrix M with x^T M x = (x,x)_{z0}."""
    m = space.dim
    g = [[space.gram[i][j] for j in range(m)] for i in range(m)]
    s = [vec(v) for v in z0_span]
    k = len(s)
    gs = [[sum(g[i][j] * s[a][j] for j in range(m)) for a in range(k)]
          for i in range(m)]  # G S  (m x k)
    sgs = [[sum(s[a][i] * gs[i][b] for i in range(m)) for b in range(k)]
           for a in range(k)]
    inv = mat_inv(sgs)
    # M = G - 2 (G S) (S^T G S)^{-1} (G S)^T
    out = [[g[i][j] - 2 * sum(gs[i][a] * inv[a][b] * gs[j][b]
                              for a in range(k) for b in range(k))
            for j in range(m)] for i in range(m)]
    return out


@dataclass
class EnumWindow:
    z0: NegativePlane
    B: Fraction
    kappa: float
    safety: float
    nmax: Fraction


def window_from_planes(space, z0_span, planes, nmax, safety=1.5):
    """Comparability window: kappa = safety * max over the given boundary
    planes of the largest generalized eigenvalue of M_{z0} against M_z."""
    z0 = NegativePlane(space, z0_span)
    m0 = np.array([[float(v) for v in row]
                   for row in majorant_matrix(space, z0_span)])
    kappa = 1.0
    for pl in planes:
        mz = np.array([[float(v) for v in row]
                       for row in majorant_matrix(space, pl.span)])
        ev = eigh(m0, mz, eigvals_only=True)
        kappa = max(kappa, float(np.max(ev)))
    kappa *= safety
    b = Fraction(math.ceil(kappa * 2.0 * float(nmax) * 64)) / 64
    return EnumWindow(z0=z0, B=b, kappa=kappa, safety=safety, nmax=rat(nmax))


def certify_window(space, ngon, z0_span, nmax, safety=1.5, edge_samples=32):
    """Window for an N-gon kernel: planes sampled along the boundary polygon."""
    planes = [vertex_plane(ngon, j) for j in range(1, ngon.n + 1)]
    for j in range(1, ngon.n + 1):
        for i in range(1, edge_samples + 1):
            planes.append(gamma_sample(ngon, j, Fraction(i, edge_samples + 1)))
    return window_from_planes(space, z0_span, planes, nmax, safety=safety)


def _fp_enumerate(m_exact, mu, bound):
    """All integer vectors k with (k+mu)^T M (k+mu) <= bound (exact test),
    lexicographically sorted.  Float Fincke-Pohst bounds with padding feed an
    exact integer filter."""
    m = len(m_exact)
    mf = np.array([[float(v) for v in row] for row in m_exact])
    muf = np.array([float(v) for v in mu])
    bf = float(bound)
    # LDL^T: q(x) = sum_i d_i (x_i + sum_{j>i} l_ij x_j)^2, i eliminated upward
    a = mf.copy()
    dvec = np.empty(m)
    lmat = np.zeros((m, m))
    for i in range(m):
        dvec[i] = a[i, i]
        lmat[i, i + 1:] = a[i, i + 1:] / a[i, i]
        a[i + 1:, i + 1:] -= np.outer(a[i, i + 1:], a[i, i + 1:]) / a[i, i]
    pad = 1e-7 * (1.0 + abs(bf))
    cands = []
    ks = np.zeros(m)

    def rec(i, budget):
        # x_j fixed for j > i; x = k + mu
        if i < 0:
            cands.append(ks.copy())
            return
        shift = muf[i] + lmat[i, i + 1:] @ (ks[i + 1:] + muf[i + 1:])
        if budget < -pad:
            return
        t = math.sqrt(max(budget + pad, 0.0) / dvec[i])
        lo = math.ceil(-t - shift - 1e-9)
        hi = math.floor(t - shift + 1e-9)
        for kk in range(lo, hi + 1):
            ks[i] = kk
            y = kk + shift
            rec(i - 1, budget - dvec[i] * y * y)
        ks[i] = 0.0

    rec(m - 1, bf)
    if not cands:
        return np.zeros((0, m), dtype=np.int64)
    arr = np.array(cands, dtype=np.int64)
    arr = arr[np.lexsort(arr.T[::-1])]
    # exact filter: scale mu and M to integers
    dmu = math.lcm(*(c.denominator for c in mu)) if m else 1
    dm = math.lcm(*(v.denominator for row in m_exact for v in row))
    mi = np.array([[int(v * dm) for v in row] for row in m_exact],
                  dtype=object)
    xnum = arr * dmu + np.array([int(c * dmu) for c in mu], dtype=object)
    qvals = np.einsum('ij,jk,ik->i', xnum, mi, xnum)
    keep = [i for i, qv in enumerate(qvals)
            if Fraction(int(qv), dm * dmu * dmu) <= bound]
    return arr[keep]


def enumerate_coset(coset, window, slack=Fraction(1)):
    """Vectors x in mu+L with (x,x)_{z0} <= slack*B, as integer k-rows plus
    the exact shift mu."""
    m_exact = majorant_matrix(coset.space, window.z0.span)
    return _fp_enumerate(m_exact, coset.mu, window.B * slack)


@dataclass
class QExpansion:
    mu: tuple
    entries: dict                      # Fraction n -> coefficient
    nmax: Fraction
    flags: set = field(default_factory=set)   # boundary-incident exponents
    window: EnumWindow = None
    normalized: bool = False

    def coeff(self, n):
        return self.entries.get(rat(n), 0)


class _XBatch:
    """Enumerated coset vectors with cached exact/float data."""

    def __init__(self, coset, window, slack=Fraction(6, 5)):
        space = coset.space
        ks = enumerate_coset(coset, window, slack)
        m = space.dim
        self.dmu = math.lcm(*(c.denominator for c in coset.mu))
        munum = np.array([int(c * self.dmu) for c in coset.mu], dtype=np.int64)
        self.xnum = ks * self.dmu + munum       # int64 numerators, denom dmu
        self.xf = self.xnum.astype(float) / self.dmu
        gi = np.array([[int(v) for v in row] for row in space.gram],
                      dtype=np.int64)
        xg = self.xnum.astype(object) @ gi.astype(object)
        self.xx_num = np.einsum('ij,ij->i', xg, self.xnum.astype(object))
        self.den2 = self.dmu * self.dmu
        # exact (x,x)_{z0} for the window split
        mz = majorant_matrix(space, window.z0.span)
        dm = math.lcm(*(v.denominator for row in mz for v in row))
        mzi = np.array([[int(v * dm) for v in row] for row in mz], dtype=object)
        t = np.einsum('ij,jk,ik->i', self.xnum.astype(object), mzi,
                      self.xnum.astype(object))
        self.inside = np.array(
            [Fraction(int(v), dm * self.den2) <= window.B for v in t])

    def q_exact(self, i):
        return Fraction(int(self.xx_num[i]), 2 * self.den2)


def _sign_matrix(batch, space, cs):
    """Exact signs of (x, C_j) for all rows of the batch (integer arithmetic)."""
    gi = np.array([[int(v) for v in row] for row in space.gram], dtype=object)
    dc = math.lcm(*(c.denominator for C in cs for c in C))
    cn = np.array([[int(c * dc) for c in C] for C in cs], dtype=object)
    vals = batch.xnum.astype(object) @ gi @ cn.T
    return np.sign(vals.astype(float)).astype(np.int64), vals


def holomorphic_series(coset, ngon, nmax, window=None, normalized=False,
                       safety=1.5, _attempt=0):
    """q-expansion of sum_x eps(x) q^{Q(x)} over the certified window."""
    space = coset.space
    nmax = rat(nmax)
    if window is None:
        window = certify_window(space, ngon, _default_z0_span(ngon), nmax,
                                safety=safety)
    batch = _XBatch(coset, window)
    signs, _ = _sign_matrix(batch, space, ngon.cs)
    n = ngon.n
    w = w_invariant(ngon)
    prod = np.einsum('ij,ij->i', signs, np.roll(signs, -1, axis=1))
    eps = w + prod
    regular = np.all(signs != 0, axis=1)
    entries = {}
    flags = set()
    bad_guard = False
    for i in range(len(eps)):
        qx = batch.q_exact(i)
        # the kernel vanishes identically on nonzero vectors of norm <= 0,
        # so only exponents in [0, nmax] can carry coefficients or flags
        if qx < 0 or qx > nmax:
            continue
        if not batch.inside[i]:
            if eps[i] != 0 and batch.xx_num[i] != 0:
                bad_guard = True
            continue
        if not regular[i] and qx > 0:
            flags.add(qx)
        if eps[i] != 0:
            entries[qx] = entries.get(qx, 0) + int(eps[i])
    if bad_guard:
        if _attempt >= 3:
            raise CertificationError(
                "guard band contains kernel-supported vectors; "
                f"retried up to safety={safety}")
        return holomorphic_series(coset, ngon, nmax, window=None,
                                  normalized=normalized, safety=safety * 2,
                                  _attempt=_attempt + 1)
    entries = {k: v for k, v in sorted(entries.items())}
    if normalized:
        entries = {k: Fraction(v, 4) for k, v in entries.items()}
    return QExpansion(mu=coset.mu, entries=entries, nmax=nmax, flags=flags,
                      window=window, normalized=normalized)


def _default_z0_span(ngon):
    """Base plane: the first vertex plane."""
    return vertex_plane(ngon, 1).span


class _CompletionKernel:
    """Per-polygon cached data for the stable completion kernel
       kernel(x) = eps(x) + sum_k (s_{k-1}+s_{k+1}) e_k + sum_j rho_j,
    evaluated pre-multiplied by e^{amp}, amp = 2 pi v max(0,-Q)."""

    def __init__(self, space, ngon, w_offset=0):
        from .errfn import cone_mass_2d, cone_dist2
        self._cone_mass_2d = cone_mass_2d
        self._cone_dist2 = cone_dist2
        self.space = space
        self.ngon = ngon
        self.w = w_invariant(ngon) + w_offset
        n = ngon.n
        gf = space.gram_f
        self.chat = np.array([space.unit_negative(c) for c in ngon.cs])
        self.chat_g = self.chat @ gf            # rows: (chat_k, .)
        self.edge_proj = []                     # 2 x m maps x -> plane coords
        self.edge_ainv = []                     # inverse functional matrices
        self.edge_a = []
        for j in range(n):
            pl = NegativePlane(space, (ngon.cs[j], ngon.cs[(j + 1) % n]))
            p = pl.ortho @ gf
            self.edge_proj.append(-p)           # coords of pr_z(x)
            c0 = np.array([float(v) for v in ngon.cs[j]])
            c1 = np.array([float(v) for v in ngon.cs[(j + 1) % n]])
            a = np.vstack([p @ c0, p @ c1])     # rows a_w[k] = (u_k, c_w)
            self.edge_a.append(a)
            self.edge_ainv.append(np.linalg.inv(a))

    def eval_batch(self, batch, v, scale_literal=False):
        """Array of e^{amp}-scaled kernel values for all batch rows inside the
        window; rows outside get 0 (guard band handled by caller)."""
        ngon, space = self.ngon, self.space
        n = ngon.n
        signs, _ = _sign_matrix(batch, space, ngon.cs)
        scale = math.sqrt(2.0) if scale_literal else math.sqrt(2.0 * v)
        tmat = scale * (batch.xf @ self.chat_g.T)      # tau_k margins
        qf = self.xxf(batch) / 2.0
        amp = np.minimum(2.0 * math.pi * v * np.maximum(0.0, -qf), AMP_CAP)
        prod = np.einsum('ij,ij->i', signs, np.roll(signs, -1, axis=1))
        eps = (self.w + prod).astype(float)
        out = eps * np.exp(amp)
        # wall terms: (s_{k-1}+s_{k+1}) * (erf(sqrt(pi) tau_k) - s_k) * e^{amp}
        coef = np.roll(signs, 1, axis=1) + np.roll(signs, -1, axis=1)
        with np.errstate(over='ignore'):
            ek = np.where(
                signs != 0,
                -signs * erfcx(math.sqrt(math.pi) * np.abs(tmat))
                * np.exp(np.minimum(amp[:, None] - math.pi * tmat ** 2, AMP_CAP)),
                0.0)
        out += np.sum(coef * ek, axis=1)
        # rho terms: signed Gaussian cone masses.  A cone with nonzero weight
        # flips every wall carrying a nonzero sign, so its distance from the
        # Gaussian center is at least the larger signed-wall margin.
        eff = np.where(signs != 0, np.abs(tmat), 0.0)
        teff = np.maximum(eff, np.roll(eff, -1, axis=1))
        screen = amp[:, None] - math.pi * teff ** 2 > RHO_LOG_TOL
        for i in np.nonzero(np.any(screen, axis=1))[0]:
            out[i] += self._rho(batch.xf[i], scale, signs[i], float(amp[i]),
                                np.nonzero(screen[i])[0])
        return out

    @staticmethod
    def xxf(batch):
        return batch.xx_num.astype(float) / batch.den2

    def _rho(self, xf, scale, s, amp, edges):
        total = 0.0
        n = self.ngon.n
        for j in edges:
            u = scale * (self.edge_proj[j] @ xf)
            s1, s2 = int(s[j]), int(s[(j + 1) % n])
            ainv = self.edge_ainv[j]
            for sig1 in (1, -1):
                for sig2 in (1, -1):
                    g = (sig1 - s1) * (sig2 - s2)
                    if g == 0:
                        continue
                    gens = ainv * np.array([sig1, sig2])
                    d2 = self._cone_dist2(u, gens)
                    if amp - math.pi * d2 < RHO_LOG_TOL:
                        continue
                    total += g * self._cone_mass_2d(u, gens[:, 0], gens[:, 1],
                                                    amp=min(amp, AMP_CAP))
        return total


def completion_eval(coset, ngon, tau, nmax, window=None, paper_literal=False,
                    w_offset=0, _kernel=None, _batch=None):
    """Value of the completed series at tau for one coset, with a tail
    estimate: (value, tail)."""
    space = coset.space
    v = tau.imag
    if v <= 0:
        raise ValueError("tau must lie in the upper half plane")
    if window is None:
        window = certify_window(space, ngon, _default_z0_span(ngon), nmax)
    kern = _kernel or _CompletionKernel(space, ngon, w_offset)
    batch = _batch or _XBatch(coset, window)
    scaled = _eval_kernel_chunked(kern, batch, v, paper_literal)
    qf = kern.xxf(batch) / 2.0
    phase = np.exp(2j * math.pi * tau.real * qf
                   - 2.0 * math.pi * v * np.maximum(qf, 0.0))
    terms = np.where(batch.inside, scaled * phase, 0.0)
    # fixed chunk-order accumulation: thread-count independent
    total = complex(0.0)
    for start in range(0, len(terms), CHUNK):
        total += complex(np.sum(terms[start:start + CHUNK]))
    tail = _tail_estimate(batch, window, ngon.n, v)
    return total, tail


def _eval_kernel_chunked(kern, batch, v, paper_literal):
    nthreads = thread_count()
    nrows = len(batch.xf)
    if nrows == 0:
        return np.zeros(0)
    chunks = [(s, min(s + CHUNK, nrows)) for s in range(0, nrows, CHUNK)]

    def run(se):
        sub = _BatchView(batch, se[0], se[1])
        return kern.eval_batch(sub, v, paper_literal)

    if nthreads == 1 or len(chunks) == 1:
        parts = [run(se) for se in chunks]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            parts = list(ex.map(run, chunks))
    return np.concatenate(parts)


class _BatchView:
    def __init__(self, batch, lo, hi):
        self.xnum = batch.xnum[lo:hi]
        self.xf = batch.xf[lo:hi]
        self.xx_num = batch.xx_num[lo:hi]
        self.den2 = batch.den2
        self.inside = batch.inside[lo:hi]
        self.dmu = batch.dmu


def _tail_estimate(batch, window, n_edges, v):
    """Heuristic tail bound 2N * sum_{(x,x)_{z0} > B} e^{-pi v (x,x)_{z0}/kappa},
    with the lattice-point density calibrated from the enumerated ball."""
    m = batch.xf.shape[1] if len(batch.xf) else 1
    bf = float(window.B)
    count = max(len(batch.xf), 1)
    c = count * (m / 2.0) / max(bf, 1.0) ** (m / 2.0)
    lam = math.pi * v / window.kappa
    # integral_B^inf t^{m/2-1} e^{-lam t} dt = Gamma(m/2) lam^{-m/2} Q(m/2, lam B)
    integral = gamma_fn(m / 2.0) * lam ** (-m / 2.0) * gammaincc(m / 2.0, lam * bf)
    return 4.0 * (2 * n_edges) * c * integral


# --- Weil representation checks -------------------------------------------

# S-matrix convention for the weight-m/2 completion, calibrated at tau=i
# on the reference rank-3 lattice and validated by the S^2 composition check:
#   theta_mu(-1/tau) = tau^{m/2} * (phase/sqrt|D|) * sum_nu e(+(mu,nu)) theta_nu(tau)
# with phase = e((q-p)/8) for signature (p,q) and the principal branch of
# tau^{m/2}.
S_PAIRING_SIGN = +1


def weil_matrices(space):
    """(T diagonal, S matrix) of the finite quadratic module L∨/L."""
    reps = disc_group(space)
    d = len(reps)
    p, q = space.sig
    tdiag = np.array([cmath.exp(2j * math.pi * float(space.q(mu)))
                      for mu in reps])
    phase = cmath.exp(2j * math.pi * (q - p) / 8.0)
    s = np.empty((d, d), dtype=complex)
    for i, mu in enumerate(reps):
        for j, nu in enumerate(reps):
            s[i, j] = cmath.exp(
                2j * math.pi * S_PAIRING_SIGN * float(space.inner(mu, nu)))
    s *= phase / math.sqrt(d)
    return reps, tdiag, s


def weil_sanity(space):
    """Return (unitarity defect, S^2-composition defect); both should be ~0."""
    reps, _, s = weil_matrices(space)
    d = len(reps)
    uni = float(np.max(np.abs(s @ s.conj().T - np.eye(d))))
    # S^2 = phase^2 * permutation mu -> -mu
    perm = np.zeros((d, d))
    index = {mu: i for i, mu in enumerate(reps)}
    for i, mu in enumerate(reps):
        neg = tuple((-c) % 1 for c in mu)
        perm[index[neg], i] = 1.0
    p, q = space.sig
    ph2 = cmath.exp(2j * math.pi * (q - p) / 4.0)
    comp = float(np.max(np.abs(s @ s - ph2 * perm)))
    return uni, comp


def modularity_check(space, ngon, tau, nmax, paper_literal=False, w_offset=0):
    """Compare the completion vector at tau+1 and -1/tau against the finite
    Weil transform; returns a report dict."""
    reps, tdiag, smat = weil_matrices(space)
    m = space.dim
    window = certify_window(space, ngon, _default_z0_span(ngon), nmax)
    kern = _CompletionKernel(space, ngon, w_offset)

    batches = {mu: _XBatch(LatticeCoset(space, mu), window) for mu in reps}

    def theta_vec(t):
        vals, tails = [], []
        for mu in reps:
            coset = LatticeCoset(space, mu)
            val, tail = completion_eval(coset, ngon, t, nmax, window=window,
                                        paper_literal=paper_literal,
                                        _kernel=kern, _batch=batches[mu])
            vals.append(val)
            tails.append(tail)
        return np.array(vals), max(tails)

    base, tail0 = theta_vec(tau)
    shifted, tail1 = theta_vec(tau + 1)
    t_defect = float(np.max(np.abs(shifted - tdiag * base)))
    inverted, tail2 = theta_vec(-1 / tau)
    auto = tau ** (m / 2.0)
    s_defect = float(np.max(np.abs(inverted - auto * (smat @ base))))
    uni, comp = weil_sanity(space)
    return {
        "t_defect": t_defect,
        "s_defect": s_defect,
        "tail": max(tail0, tail1, tail2),
        "weil_unitarity": uni,
        "weil_composition": comp,
        "theta": base,
    }
