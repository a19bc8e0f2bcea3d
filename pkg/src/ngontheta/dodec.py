"""Dodecahedral cells in signature (m-3,3): the fixed face-cycle
combinatorics on Z/12Z, the per-face 5-gon conditions on projected
collections, the sign kernels D and P, their error-function completion E,
the rational seed construction, and certified q-expansions.

Faces are labeled by Z/12Z with antipodal involution a -> abar = -(a+1);
the cycle F(i) lists the five faces adjacent to face i, clockwise with
respect to the outward normal.  The collection C_0..C_11 of negative
vectors satisfies the dodecahedron conditions when, for every face i, the
projected 5-tuple R(i) = (P_i C_j)_{j in F(i)} satisfies the 5-gon
conditions inside V_i = C_i^perp.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qspace import NegativePlane, rat, vec, vec_add, vec_scale
from .ngon import sgn, check_conditions


def bar(a):
    """The antipodal face label, -(a+1) mod 12."""
    return (-(a + 1)) % 12


# Cycles of the six `upper' faces; the lower six follow from the involution.
_TOP_CYCLES = {
    0: (1, 2, 3, 4, 5),
    1: (0, 5, bar(3), bar(4), 2),
    2: (0, 1, bar(4), bar(5), 3),
    3: (0, 2, bar(5), bar(1), 4),
    4: (0, 3, bar(1), bar(2), 5),
    5: (0, 4, bar(2), bar(3), 1),
}


@dataclass(frozen=True)
class DodecCombinatorics:
    cycles: dict        # face i -> 5-tuple F(i)
    vertices: tuple     # 20 ordered incidence triples (i, u, v)


def recipe_step(cycle_i, i, j):
    """Adjacency recipe: rotate F(i) into the form (a, j, b, u, v) and return
    (b, i, a, bar(u), bar(v)), a rotation of F(j)."""
    if j not in cycle_i:
        raise ValueError(f"face {j} is not adjacent to face {i}")
    p = cycle_i.index(j)
    a, _, b, u, v = tuple(cycle_i[(p - 1 + k) % 5] for k in range(5))
    return (b, i, a, bar(u), bar(v))


def cyclic_equal(t1, t2):
    n = len(t1)
    return len(t2) == n and any(
        tuple(t1[(k + r) % n] for k in range(n)) == tuple(t2) for r in range(n))


def cycle_table():
    """The fixed face-cycle table with its 20 vertex triples; all structural
    invariants are checked at construction."""
    cycles = dict(_TOP_CYCLES)
    for a in range(6):
        cycles[bar(a)] = tuple(bar(x) for x in reversed(cycles[a]))
    seen = {}
    verts = []
    for i in range(12):
        cyc = cycles[i]
        for k in range(5):
            tri = (i, cyc[k], cyc[(k + 1) % 5])
            key = frozenset(tri)
            if key not in seen:
                seen[key] = tri
                verts.append(tri)
    comb = DodecCombinatorics(cycles=cycles, vertices=tuple(verts))
    _check_table(comb)
    return comb


def _check_table(comb):
    cycles, verts = comb.cycles, comb.vertices
    assert len(verts) == 20, "a dodecahedron has 20 vertices"
    counts = {}
    for i in range(12):
        assert len(set(cycles[i])) == 5 and i not in cycles[i]
        assert bar(i) not in cycles[i], "antipodal faces are not adjacent"
        for j in cycles[i]:
            assert i in cycles[j], "adjacency must be symmetric"
            assert cyclic_equal(recipe_step(cycles[i], i, j), cycles[j]), \
                f"recipe closure fails for faces {i} -> {j}"
        for k in range(5):
            key = frozenset((i, cycles[i][k], cycles[i][(k + 1) % 5]))
            counts[key] = counts.get(key, 0) + 1
    assert all(c == 3 for c in counts.values()), \
        "each vertex must be shared by exactly 3 faces"
    assert len(counts) == 20


class DodecValidationError(ValueError):
    def __init__(self, diagnostics):
        msgs = "; ".join(f"face {i}: {v}" for i, v in diagnostics[:4])
        extra = "" if len(diagnostics) <= 4 else f" (+{len(diagnostics) - 4} more)"
        super().__init__("dodecahedron conditions fail: " + msgs + extra)
        self.diagnostics = diagnostics


def check_dodec_conditions(space, cs):
    """All violated (face, Violation) pairs of the per-face 5-gon conditions
    on the projected tuples R(i); exact rational arithmetic."""
    cs = tuple(vec(c) for c in cs)
    comb = cycle_table()
    out = []
    for i in range(12):
        r = projected_tuple(space, cs, comb.cycles[i], i)
        for viol in check_conditions(space, r):
            out.append((i, viol))
    return out


def projected_tuple(space, cs, cycle, i):
    """R(i) = (P_i C_j)_{j in F(i)} with P_i the orthogonal projection to
    C_i^perp; vectors stay in ambient coordinates."""
    if space.inner(cs[i], cs[i]) >= 0:
        raise DodecValidationError(
            [(i, f"(C_{i}, C_{i}) = {space.inner(cs[i], cs[i])} not < 0")])
    return tuple(space.project_perp(cs[j], cs[i]) for j in cycle)


class DodecData:
    """A validated dodecahedral collection.  Immutable."""

    def __init__(self, space, cs, _checked=False):
        if space.sig[1] != 3:
            raise ValueError("dodecahedral collections live in signature (p, 3)")
        cs = tuple(vec(c) for c in cs)
        if len(cs) != 12:
            raise ValueError("need exactly 12 vectors indexed by Z/12Z")
        if not _checked:
            bad = check_dodec_conditions(space, cs)
            if bad:
                raise DodecValidationError(bad)
        self.space = space
        self.cs = cs
        self.comb = cycle_table()
        self.projected = tuple(
            projected_tuple(space, cs, self.comb.cycles[i], i)
            for i in range(12))
        self.face_w = tuple(self._w_face(i) for i in range(12))

    def __repr__(self):
        return f"DodecData(sig={self.space.sig})"

    def _w_face(self, i):
        """w(R(i)) = -sum_l sgn((v_i, R(i)_l)) sgn((v_i, R(i)_{l+1})) for a
        negative v_i in V_i with all pairings nonzero (deterministic choice)."""
        space, r = self.space, self.projected[i]
        v = r[0]
        k = 2
        while any(space.inner(v, c) == 0 for c in r):
            v = vec_add(r[0], vec_scale(Fraction(1, k), r[1]))
            if space.inner(v, v) >= 0:
                v = r[0]
            k += 1
            if k > 10000:
                raise RuntimeError("could not find a regular negative vector in V_i")
        s = [sgn(space.inner(v, c)) for c in r]
        return -sum(s[l] * s[(l + 1) % 5] for l in range(5))

    def vertex_vectors(self, tri):
        return tuple(self.cs[a] for a in tri)


def validate_dodec(space, cs):
    """Return a DodecData or raise DodecValidationError naming, per face,
    the violated 5-gon inequality (face, j, which condition)."""
    return DodecData(space, cs)


def default_negative_vector(dodec):
    """Deterministic negative vector with all (v, C_i) nonzero (same policy
    as for N-gons: C_0, perturbed by C_1/k if needed)."""
    space, cs = dodec.space, dodec.cs
    v = cs[0]
    if all(space.inner(v, c) != 0 for c in cs):
        return v
    k = 2
    while True:
        v = vec_add(cs[0], vec_scale(Fraction(1, k), cs[1]))
        if space.inner(v, v) < 0 and all(space.inner(v, c) != 0 for c in cs):
            return v
        k += 1
        if k > 10000:
            raise RuntimeError("could not find a regular negative vector")


def dodec_D_kernel(dodec, x):
    """D(x) = 1/8 sum_nu sgn(x;nu) + 1/8 sum_i w(R(i)) sgn((x,C_i)), where
    sgn(x;nu) is the product of the three signs of the vertex triple.  The
    sign is fixed so that D is the pointwise limit of the smooth kernel E
    along regular rays, which the completed series requires."""
    space, cs = dodec.space, dodec.cs
    x = vec(x)
    s = [sgn(space.inner(x, c)) for c in cs]
    trip = sum(s[i] * s[u] * s[v] for (i, u, v) in dodec.comb.vertices)
    wsum = sum(dodec.face_w[i] * s[i] for i in range(12))
    return Fraction(trip + wsum, 8)


def dodec_P_kernel(dodec, x, v=None):
    """P(x) = D(x) - D(v) for a (deterministic by default) negative v."""
    if v is None:
        v = default_negative_vector(dodec)
    else:
        v = vec(v)
        if not dodec.space.inner(v, v) < 0:
            raise ValueError("P kernel requires a negative vector v")
    return dodec_D_kernel(dodec, x) - dodec_D_kernel(dodec, v)


def dodec_E_kernel(dodec, x, tol=None):
    """E(x) = 1/8 sum_nu E3(nu, x sqrt(2)) + 1/8 sum_i w(R(i)) E1(C_i, x sqrt(2));
    the smooth completion of D (continuous across every wall (x,C_i)=0)."""
    from .errfn import E1, E3, DEFAULT_TOL
    space, cs = dodec.space, dodec.cs
    if tol is None:
        tol = DEFAULT_TOL
    xf = np.array([float(v) for v in vec(x)]) * math.sqrt(2.0)
    total = 0.0
    for (i, u, v) in dodec.comb.vertices:
        total += E3(space, cs[i], cs[u], cs[v], xf, tol)
    for i in range(12):
        total += dodec.face_w[i] * E1(space, cs[i], xf)
    return total / 8.0


# --- seed construction ------------------------------------------------------

# Rational stand-in for the golden ratio; the dodecahedron conditions are
# open, so the exact validator accepts this approximation.
PHI_HAT = Fraction(809, 500)

# Outward face normals of a regular dodecahedron for the six upper faces,
# labeled to match the cycle table (top face 0, ring 1..5 clockwise with
# respect to the outward normal); the lower six are the negatives.
_SEED_TOP = (
    (0, 1, PHI_HAT),
    (-1, PHI_HAT, 0),
    (1, PHI_HAT, 0),
    (PHI_HAT, 0, 1),
    (0, -1, PHI_HAT),
    (-PHI_HAT, 0, 1),
)


def seed_construction(space, z0_basis, v0, t=0):
    """C_t = C_0 + t * v0: the regular-dodecahedron normals embedded into the
    negative 3-plane spanned by z0_basis (an exact orthogonal basis with equal
    norms), displaced along the positive vector v0 by the 12 rationals t
    (a scalar t is broadcast)."""
    basis = [vec(b) for b in z0_basis]
    if len(basis) != 3:
        raise ValueError("z0 basis must consist of 3 vectors")
    norms = [space.inner(b, b) for b in basis]
    if any(n >= 0 for n in norms) or len(set(norms)) != 1:
        raise ValueError("z0 basis vectors must have equal negative norms")
    for a in range(3):
        for b in range(a):
            if space.inner(basis[a], basis[b]) != 0:
                raise ValueError("z0 basis must be orthogonal")
    v0 = vec(v0)
    if not space.inner(v0, v0) > 0:
        raise ValueError("v0 must be a positive vector")
    if any(space.inner(v0, b) != 0 for b in basis):
        raise ValueError("v0 must be orthogonal to the z0 plane")
    try:
        ts = [rat(t)] * 12
    except TypeError:
        ts = [rat(u) for u in t]
    if len(ts) != 12:
        raise ValueError("t must be a scalar or 12 rationals")
    coords = list(_SEED_TOP) + [None] * 6
    for a in range(6):
        coords[bar(a)] = tuple(-u for u in coords[a])
    cs = []
    for a in range(12):
        c = tuple(sum(coords[a][k] * basis[k][d] for k in range(3))
                  for d in range(space.dim))
        cs.append(vec_add(c, vec_scale(ts[a], v0)))
    return tuple(cs)


# --- q-expansion ------------------------------------------------------------

def dodec_edges(comb):
    """The 30 edges as (i, j, a, b): faces i < j adjacent, with F(i)
    containing the subsequence (a, j, b)."""
    out = []
    for i in range(12):
        cyc = comb.cycles[i]
        for p in range(5):
            j = cyc[p]
            if j < i:
                continue
            a, b = cyc[(p - 1) % 5], cyc[(p + 1) % 5]
            out.append((i, j, a, b))
    return out


def certify_dodec_window(space, dodec, z0_span, nmax, safety=1.5,
                         edge_samples=8):
    """Comparability window from the 20 vertex 3-planes and sampled edge
    planes [C_i, C_j, (s-1)C_a + s C_b]."""
    from .lattice import window_from_planes
    planes = [NegativePlane(space, dodec.vertex_vectors(tri))
              for tri in dodec.comb.vertices]
    for (i, j, a, b) in dodec_edges(dodec.comb):
        for k in range(1, edge_samples + 1):
            s = Fraction(k, edge_samples + 1)
            third = vec_add(vec_scale(s - 1, dodec.cs[a]),
                            vec_scale(s, dodec.cs[b]))
            planes.append(NegativePlane(space,
                                        (dodec.cs[i], dodec.cs[j], third)))
    return window_from_planes(space, z0_span, planes, nmax, safety=safety)


def _default_dodec_z0(dodec):
    return dodec.vertex_vectors(dodec.comb.vertices[0])


def dodec_series(coset, dodec, nmax, z0_span=None, window=None, safety=1.5,
                 _attempt=0):
    """q-expansion of sum_x P(x) q^{Q(x)} over the certified window; the
    same guard-band retry contract as the N-gon series."""
    from .lattice import (QExpansion, CertificationError, _XBatch,
                          _sign_matrix)
    space = coset.space
    nmax = rat(nmax)
    if z0_span is None:
        z0_span = _default_dodec_z0(dodec)
    if window is None:
        window = certify_dodec_window(space, dodec, z0_span, nmax,
                                      safety=safety)
    batch = _XBatch(coset, window)
    signs, _ = _sign_matrix(batch, space, dodec.cs)
    trip = np.zeros(len(signs), dtype=np.int64)
    for (i, u, v) in dodec.comb.vertices:
        trip += signs[:, i] * signs[:, u] * signs[:, v]
    warr = np.array(dodec.face_w, dtype=np.int64)
    dnum = trip + signs @ warr             # 8 * D(x)
    dv = int(8 * dodec_D_kernel(dodec, default_negative_vector(dodec)))
    pnum = dnum - dv                       # 8 * P(x)
    regular = np.all(signs != 0, axis=1)
    entries = {}
    flags = set()
    bad_guard = False
    for i in range(len(pnum)):
        qx = batch.q_exact(i)
        # the kernel vanishes identically on nonzero vectors of norm <= 0,
        # so only exponents in [0, nmax] can carry coefficients or flags
        if qx < 0 or qx > nmax:
            continue
        if not batch.inside[i]:
            if pnum[i] != 0 and batch.xx_num[i] != 0:
                bad_guard = True
            continue
        if not regular[i] and qx > 0:
            flags.add(qx)
        if pnum[i] != 0:
            entries[qx] = entries.get(qx, 0) + Fraction(int(pnum[i]), 8)
    if bad_guard:
        if _attempt >= 3:
            raise CertificationError(
                "guard band contains kernel-supported vectors; "
                f"retried up to safety={safety}")
        return dodec_series(coset, dodec, nmax, z0_span=z0_span, window=None,
                            safety=safety * 2, _attempt=_attempt + 1)
    entries = {k: v for k, v in sorted(entries.items())}
    return QExpansion(mu=coset.mu, entries=entries, nmax=nmax, flags=flags,
                      window=window)
