from fractions import Fraction

import pytest

from colline.dsl import parse_map
from colline.errors import ConstructionError, DimensionMismatch, MapDomainError
from colline.field import Vector, identity_matrix, mat_mul, mat_vec
from colline.predicates import ProbeConfig, _Sampler
from colline.zoo import (
    compose,
    default_psi,
    from_source,
    make_affine,
    make_dsl,
    make_lemma23,
    make_linear,
    make_table,
    parse_builtin,
)


def vec(*values):
    return Vector.of(*values)


def probe_vectors(dim, count, seed=0):
    sampler = _Sampler(ProbeConfig(seed=seed, count=count))
    return [sampler.vector(dim) for _ in range(count)]


class TestLinear:
    def test_identity(self):
        f = make_linear(identity_matrix(2))
        assert f(vec(3, 4)) == vec(3, 4)

    def test_matrix_vector_product(self):
        f = make_linear([[1, 2], [3, 4]])
        assert f(vec(1, 1)) == vec(3, 7)

    def test_rational_entries_exact(self):
        f = make_linear([["1/3", "1/6"]])
        assert f(vec("3/2", 6)) == vec(Fraction(3, 2))

    def test_affine_form(self):
        f = make_linear([[2, 0], [0, 2]])
        a, b = f.affine_form()
        assert mat_vec(a, vec(1, 1)) == vec(2, 2)
        assert b.is_zero()

    def test_dim_check(self):
        with pytest.raises(DimensionMismatch):
            make_linear([[1, 2]])(vec(1))


class TestAffine:
    def test_offset(self):
        g = make_affine(identity_matrix(2), vec(1, 1))
        assert g(vec(0, 0)) == vec(1, 1)

    def test_zero_matrix_collapses(self):
        g = make_affine([[0, 0], [0, 0]], vec(5, 5))
        for x in probe_vectors(2, 10):
            assert g(x) == vec(5, 5)

    def test_shape_check(self):
        with pytest.raises(DimensionMismatch):
            make_affine([[1, 0]], vec(1, 2))


class TestLemma23:
    def default(self):
        return make_lemma23(2, 2, None, 0, vec(0, 1))

    def test_spec_values(self):
        f = self.default()
        assert f(vec(1, 5)) == vec(0, 2)
        assert f(vec(-1, 5)) == vec(0, -1)
        assert f(Vector.zero(2)).is_zero()

    def test_psi_must_fix_zero(self):
        bad_psi = parse_map("map p : 1 -> 1 { y0 = x0 + 1 }").outputs[0]
        with pytest.raises(ConstructionError):
            make_lemma23(2, 2, bad_psi, 0, vec(0, 1))

    def test_d0_nonzero(self):
        with pytest.raises(ConstructionError):
            make_lemma23(2, 2, None, 0, vec(0, 0))

    def test_index_bounds(self):
        with pytest.raises(ConstructionError):
            make_lemma23(2, 2, None, 5, vec(0, 1))

    def test_default_psi_is_a_rational_bijection_on_probes(self):
        psi = default_psi()
        f = make_lemma23(1, 1, psi, 0, vec(1))
        seen = {}
        for x in probe_vectors(1, 200):
            y = f(x)
            assert seen.setdefault(y, x) == x  # injective on the sample
        # piecewise inverse exists: t for t <= 0, t/2 for t > 0
        for y in list(seen)[:50]:
            t = y.coords[0]
            pre = t if t <= 0 else t / 2
            assert f(vec(pre)) == y

    def test_image_spans_single_direction(self):
        f = self.default()
        for x in probe_vectors(2, 50):
            assert f(x).coords[0] == 0


class TestTable:
    def test_lookup_and_domain_error(self):
        t = make_table({vec(1): vec(2), vec(2): vec(4)})
        assert t(vec(1)) == vec(2)
        with pytest.raises(MapDomainError):
            t(vec(3))

    def test_needs_entries(self):
        with pytest.raises(ConstructionError):
            make_table({})


class TestCompose:
    def test_agrees_with_matrix_product(self):
        a = [[1, 2], [0, 1]]
        b = [[2, 0], [1, 1]]
        lhs = compose(make_linear(a), make_linear(b))
        rhs = make_linear(mat_mul(tuple(map(tuple, [[Fraction(x) for x in r] for r in a])),
                                  tuple(map(tuple, [[Fraction(x) for x in r] for r in b]))))
        for x in probe_vectors(2, 50):
            assert lhs(x) == rhs(x)

    def test_identity_neutral(self):
        ident = make_linear(identity_matrix(2))
        f = make_affine([[1, 1], [0, 1]], vec(2, 3))
        for x in probe_vectors(2, 50):
            assert compose(ident, f)(x) == f(x)

    def test_affine_composition_law(self):
        a, b = [[1, 2], [3, 4]], vec(1, 0)
        c, d = [[0, 1], [1, 0]], vec(0, 2)
        g1 = compose(make_affine(a, b), make_affine(c, d))
        am, cm = make_affine(a, b).affine_form()[0], make_affine(c, d).affine_form()[0]
        g2 = make_affine(mat_mul(am, cm), mat_vec(am, d) + b)
        for x in probe_vectors(2, 50):
            assert g1(x) == g2(x)

    def test_composed_affine_form(self):
        g = compose(make_affine(identity_matrix(2), vec(1, 1)), make_linear([[2, 0], [0, 2]]))
        a, b = g.affine_form()
        assert mat_vec(a, vec(1, 0)) == vec(2, 0)
        assert b == vec(1, 1)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            compose(make_linear([[1, 0]]), make_linear([[1], [2], [3]]))


class TestBuiltinSpecs:
    def test_linear_from_matrix_file(self, tmp_path):
        path = tmp_path / "m.matrix"
        path.write_text("1 1/2\n0 1\n")
        f = parse_builtin(f"linear:{path}")
        assert f(vec(2, 2)) == vec(3, 2)

    def test_lemma23_spec(self):
        f = parse_builtin("lemma23:m=2,n=2,e0=0,d0=(0,1)")
        assert f(vec(1, 5)) == vec(0, 2)

    def test_affine_spec(self, tmp_path):
        path = tmp_path / "m.matrix"
        path.write_text("1 0\n0 1\n")
        f = parse_builtin(f"affine:{path},b=(1,1)")
        assert f(vec(0, 0)) == vec(1, 1)

    def test_bad_specs(self):
        for bad in ("unknown:x", "lemma23:m=2", "lemma23:m=2,n=2,e0=0,d0=(0,1),x=3", "noargs"):
            with pytest.raises(ConstructionError):
                parse_builtin(bad)


class TestSourceRoundTrip:
    def test_all_kinds_reconstruct(self):
        handles = [
            make_linear([[1, 2], [3, 4]]),
            make_affine([[1, 0], [0, 1]], vec(1, -1)),
            make_lemma23(2, 2, None, 0, vec(0, 1)),
            make_dsl(parse_map("map f : 2 -> 1 { y0 = x0 * x1 }")),
            make_table({vec(1): vec(2)}),
            compose(make_linear([[1, 1]]), make_affine(identity_matrix(2), vec(1, 0))),
        ]
        for handle in handles:
            clone = from_source(handle.source())
            assert (clone.m, clone.n) == (handle.m, handle.n)
            probes = probe_vectors(handle.m, 20)
            for x in probes:
                try:
                    expected = handle(x)
                except MapDomainError:
                    with pytest.raises(MapDomainError):
                        clone(x)
                    continue
                assert clone(x) == expected
