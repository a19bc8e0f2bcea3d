import math
import random
from fractions import Fraction

import pytest

from ngontheta.qspace import QuadraticSpace, NegativePlane
from ngontheta.lattice import LatticeCoset
from ngontheta.dodec import (bar, cycle_table, recipe_step, cyclic_equal,
                             check_dodec_conditions, DodecValidationError,
                             validate_dodec, default_negative_vector,
                             dodec_D_kernel, dodec_P_kernel, dodec_E_kernel,
                             seed_construction, PHI_HAT, dodec_edges,
                             certify_dodec_window, dodec_series)

SP4 = QuadraticSpace([[4, 0, 0, 0], [0, -2, 0, 0],
                      [0, 0, -2, 0], [0, 0, 0, -2]])
Z0 = ((0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
V0 = (1, 0, 0, 0)
TS = [Fraction(a + 3, 40) for a in range(12)]


def _random_vec(rng, dim=4):
    return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3))
                 for _ in range(dim))


def test_bar_is_fixed_point_free_involution():
    for a in range(12):
        assert bar(bar(a)) == a
        assert bar(a) != a
        assert 0 <= bar(a) < 12


def test_cycle_table_structure():
    comb = cycle_table()
    assert len(comb.vertices) == 20
    # each face borders 5 faces and sits in exactly 5 vertex triples
    for i in range(12):
        assert len(comb.cycles[i]) == 5
        assert sum(1 for tri in comb.vertices if i in tri) == 5
    # the two faces flanking i in any triple are themselves adjacent
    for (i, u, v) in comb.vertices:
        assert v in comb.cycles[u] and u in comb.cycles[v]
    # antipodal cycle is the reversed bar image
    for a in range(12):
        assert comb.cycles[bar(a)] == tuple(bar(x)
                                            for x in reversed(comb.cycles[a]))


def test_recipe_regenerates_table_from_one_cycle():
    comb = cycle_table()
    known = {0: comb.cycles[0]}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in known[i]:
            step = recipe_step(known[i], i, j)
            if j in known:
                assert cyclic_equal(step, known[j])
            else:
                known[j] = step
                frontier.append(j)
    assert len(known) == 12
    for i in range(12):
        assert cyclic_equal(known[i], comb.cycles[i])


def test_recipe_verbatim_example():
    comb = cycle_table()
    assert recipe_step(comb.cycles[4], 4, 5) == (0, 4, 9, 8, 1)
    assert comb.cycles[5] == (0, 4, 9, 8, 1)


def test_recipe_rejects_non_adjacent():
    comb = cycle_table()
    with pytest.raises(ValueError):
        recipe_step(comb.cycles[0], 0, bar(0))


def test_seed_valid_at_zero_and_fixture(space_q3, seed_dodec):
    cs0 = seed_construction(space_q3, Z0[:3], V0, 0)
    assert check_dodec_conditions(space_q3, cs0) == []
    assert check_dodec_conditions(space_q3, seed_dodec.cs) == []


def test_seed_frame_validation(space_q3):
    with pytest.raises(ValueError):
        seed_construction(space_q3, ((0, 1, 0, 0), (0, 1, 1, 0),
                                     (0, 0, 0, 1)), V0, 0)  # not orthogonal
    with pytest.raises(ValueError):
        seed_construction(space_q3, ((0, 2, 0, 0), (0, 0, 1, 0),
                                     (0, 0, 0, 1)), V0, 0)  # unequal norms
    with pytest.raises(ValueError):
        seed_construction(space_q3, Z0, (0, 1, 0, 0), 0)    # v0 negative
    with pytest.raises(ValueError):
        seed_construction(space_q3, Z0, (1, 1, 0, 0), 0)    # v0 not orthogonal
    with pytest.raises(ValueError):
        seed_construction(space_q3, Z0, V0, [0, 1])         # wrong length


def test_negated_normal_rejected(space_q3, seed_dodec):
    bad = list(seed_dodec.cs)
    bad[0] = tuple(-t for t in bad[0])
    diags = check_dodec_conditions(space_q3, bad)
    assert sorted(set(i for i, _ in diags)) == [1, 2, 3, 4, 5]
    with pytest.raises(DodecValidationError):
        validate_dodec(space_q3, bad)


def test_dodec_rejects_wrong_shape(space_q3, space_abc):
    with pytest.raises(ValueError):
        validate_dodec(space_abc, [(0, 1, 0)] * 12)   # signature (1,2)
    with pytest.raises(ValueError):
        validate_dodec(space_q3, [(0, 1, 0, 0)] * 11)


def test_face_w_values(seed_dodec):
    # per-face 5-gon invariants satisfy w == -5 == 3 (mod 4) with |w| <= 3
    assert all(w in (-1, 3) for w in seed_dodec.face_w)
    assert seed_dodec.face_w == (-1,) * 12


def test_d_kernel_basic_values(seed_dodec):
    assert dodec_D_kernel(seed_dodec, (1, 0, 0, 0)) == 1
    assert dodec_D_kernel(seed_dodec, (0, 0, 0, 0)) == 0


def test_d_kernel_odd_bounded_eighth_integral(seed_dodec):
    rng = random.Random(31)
    for _ in range(60):
        x = _random_vec(rng)
        d = dodec_D_kernel(seed_dodec, x)
        assert d == -dodec_D_kernel(seed_dodec, tuple(-t for t in x))
        assert (8 * d).denominator == 1
        assert abs(d) <= 7


def test_d_kernel_vanishes_on_negative_vectors(seed_dodec):
    rng = random.Random(33)
    hits = 0
    for _ in range(300):
        v = _random_vec(rng)
        if seed_dodec.space.inner(v, v) < 0:
            hits += 1
            assert dodec_D_kernel(seed_dodec, v) == 0
    assert hits > 50


def test_p_kernel_properties(seed_dodec):
    rng = random.Random(35)
    v0 = default_negative_vector(seed_dodec)
    assert seed_dodec.space.inner(v0, v0) < 0
    assert dodec_P_kernel(seed_dodec, v0) == 0
    with pytest.raises(ValueError):
        dodec_P_kernel(seed_dodec, (1, 0, 0, 0), v=(1, 0, 0, 0))
    # P is independent of the chosen base vector v
    for _ in range(20):
        v = _random_vec(rng)
        if not seed_dodec.space.inner(v, v) < 0:
            continue
        for x in ((1, 0, 0, 0), (2, 1, 0, 1), (3, -1, 2, 0)):
            assert dodec_P_kernel(seed_dodec, x, v=v) == \
                dodec_P_kernel(seed_dodec, x)


def test_e_kernel_continuous_across_wall(seed_dodec):
    # the ray x(s) = e1 + s (0, 1/10, 3/40, 0) leaves the cell through the
    # wall (x, C_2) = 0 at s0; D jumps there while E stays continuous
    def ray(s):
        return (1, s * Fraction(1, 10), s * Fraction(3, 40), 0)

    s0 = Fraction(2500, 4427)
    assert seed_dodec.space.inner(ray(s0), seed_dodec.cs[2]) == 0
    assert [i for i in range(12)
            if seed_dodec.space.inner(ray(s0), seed_dodec.cs[i]) == 0] == [2]
    delta = Fraction(1, 1000)
    lo, hi = ray(s0 - delta), ray(s0 + delta)
    assert dodec_D_kernel(seed_dodec, lo) == 1
    assert dodec_D_kernel(seed_dodec, hi) == 0
    a = dodec_E_kernel(seed_dodec, lo)
    b = dodec_E_kernel(seed_dodec, hi)
    assert abs(a - b) < 1e-2


def test_e_kernel_limits_to_d(seed_dodec):
    x = (1, 0, 0, 0)
    val = dodec_E_kernel(seed_dodec, tuple(40 * t for t in x))
    assert abs(val - float(dodec_D_kernel(seed_dodec, x))) < 1e-6


def test_dodec_edges(seed_dodec):
    edges = dodec_edges(seed_dodec.comb)
    assert len(edges) == 30
    comb = seed_dodec.comb
    per_face = {i: 0 for i in range(12)}
    for (i, j, a, b) in edges:
        assert i < j
        assert j in comb.cycles[i] and i in comb.cycles[j]
        per_face[i] += 1
        per_face[j] += 1
        # a and b flank j in F(i), so each shares a vertex with both i and j
        assert a in comb.cycles[i] and b in comb.cycles[i]
    assert all(c == 5 for c in per_face.values())


def test_vertex_planes_are_negative(seed_dodec):
    for tri in seed_dodec.comb.vertices:
        NegativePlane(seed_dodec.space, seed_dodec.vertex_vectors(tri))


@pytest.fixture(scope="module")
def seed_dodec4():
    cs = seed_construction(SP4, Z0, V0, TS)
    return validate_dodec(SP4, cs)


def test_dodec_series_shifted_coset(seed_dodec4):
    mu = (Fraction(1, 4), 0, 0, 0)
    series = dodec_series(LatticeCoset(SP4, mu), seed_dodec4, 4)
    assert series.coeff(Fraction(1, 8)) == 1
    assert series.coeff(Fraction(9, 8)) == -1
    assert series.coeff(Fraction(25, 8)) == 1
    for c in series.entries.values():
        assert (8 * c).denominator == 1


def test_dodec_series_zero_coset_vanishes(seed_dodec4):
    # P is odd and D(v) = 0, so the antipodally symmetric coset cancels
    series = dodec_series(LatticeCoset(SP4), seed_dodec4, 4)
    assert all(c == 0 for c in series.entries.values())


def test_dodec_series_safety_invariance(seed_dodec4):
    mu = (Fraction(1, 4), 0, 0, 0)
    s1 = dodec_series(LatticeCoset(SP4, mu), seed_dodec4, 3, safety=1.5)
    s2 = dodec_series(LatticeCoset(SP4, mu), seed_dodec4, 3, safety=3.0)
    assert s1.entries == s2.entries
    assert s1.flags == s2.flags


def test_dodec_window_grows_with_nmax(seed_dodec4):
    z0 = seed_dodec4.vertex_vectors(seed_dodec4.comb.vertices[0])
    w1 = certify_dodec_window(SP4, seed_dodec4, z0, 2)
    w2 = certify_dodec_window(SP4, seed_dodec4, z0, 4)
    assert w2.B >= 2 * w1.B * Fraction(63, 64)
