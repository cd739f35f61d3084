import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brody_forge.errors import PoleError
from brody_forge.products import (
    LogComplex,
    NodeSystem,
    eval_H_excl,
    eval_H_excl_deriv,
    eval_H_excl_logderiv,
    eval_h,
    eval_h_deriv,
    eval_h_log,
    lemma1_classify,
    truncation_bound,
    validate_nodes,
    wrap_phase,
)

from oracles import mp_nodes, mp_product

TWO = NodeSystem.explicit([1, -1])


class TestValidate:
    def test_geometric_ok(self):
        nodes = NodeSystem.geometric(4, 4, 8)
        assert validate_nodes(nodes).ok
        assert nodes.tail_bound == pytest.approx(1 / (4 * 4**7 * 3), rel=1e-15)
        assert nodes.tail_bound == pytest.approx(5.09e-6, rel=1e-3)

    def test_duplicate(self):
        report = validate_nodes(NodeSystem.explicit([1, 1, 2]))
        assert not report.ok
        assert any("duplicate" in v for v in report.violations)

    def test_zero(self):
        report = validate_nodes(NodeSystem.explicit([0, 3]))
        assert any("zero node" in v for v in report.violations)

    def test_ratio_not_above_one(self):
        report = validate_nodes(NodeSystem.geometric(1, 1.0, 5))
        assert any("non-convergent" in v for v in report.violations)

    def test_reports_every_violation(self):
        report = validate_nodes(NodeSystem.explicit([0, 0, 2]))
        assert len(report.violations) == 3  # two zeros, one duplicate pair

    def test_tail_threshold(self):
        nodes = NodeSystem.geometric(1, 1.1, 3)
        assert not validate_nodes(nodes, max_tail_bound=1e-3).ok

    def test_json_round_trip(self):
        for nodes in (NodeSystem.geometric(4, 4, 8), NodeSystem.explicit([1, -1j, 2 + 3j])):
            again = NodeSystem.from_json(nodes.to_json())
            np.testing.assert_array_equal(again.alpha, nodes.alpha)


class TestEvalH:
    def test_zero_at_node(self, default_nodes):
        assert eval_h(default_nodes.alpha[0], default_nodes) == 0

    def test_two_nodes(self):
        assert eval_h(2, TWO) == pytest.approx(9, rel=1e-15)

    def test_matches_high_precision_product(self):
        nodes = NodeSystem.geometric(4, 4, 8)
        ref = mp_product(2, mp_nodes(4, 4, 8))
        got = eval_h(2, nodes)
        assert abs(got - complex(ref)) / abs(complex(ref)) <= 1e-12

    def test_truncation_bound_against_long_product(self):
        nodes = NodeSystem.geometric(4, 4, 8)
        long = mp_product(2, mp_nodes(4, 4, 200))
        short = mp_product(2, mp_nodes(4, 4, 8))
        actual = abs(complex(mpmath.log(long / short)))
        assert actual <= truncation_bound(2, nodes)
        assert truncation_bound(2, nodes) < 3e-5

    def test_overflow_signalled(self):
        nodes = NodeSystem.geometric(1e-3, 1.5, 12)
        with pytest.raises(OverflowError):
            eval_h(1e300, nodes)

    def test_derivative_vanishes_at_nodes(self, default_nodes):
        assert np.all(eval_h_deriv(default_nodes.alpha, default_nodes) == 0)

    def test_derivative_finite_difference(self):
        nodes = NodeSystem.geometric(4, 4, 6)
        z = 2.3 + 0.7j
        h = 1e-6
        fd = (eval_h(z + h, nodes) - eval_h(z - h, nodes)) / (2 * h)
        assert abs(eval_h_deriv(z, nodes) - fd) / abs(fd) < 1e-8


class TestLogForm:
    def test_two_nodes(self):
        lc = eval_h_log(2, TWO)
        assert lc.log_mag == pytest.approx(math.log(9), rel=1e-15)
        assert lc.phase == pytest.approx(0, abs=1e-15)

    def test_exact_zero(self, default_nodes):
        assert eval_h_log(default_nodes.alpha[2], default_nodes).log_mag == -math.inf

    def test_matches_high_precision(self, default_nodes):
        ref = complex(mp_product(10, mp_nodes(4, 4, 12)))
        got = eval_h_log(10, default_nodes).to_complex()
        assert abs(got - ref) / abs(ref) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
    def test_direct_and_log_agree(self, z):
        nodes = NodeSystem.geometric(4, 4, 12)
        direct = eval_h(z, nodes)
        via_log = eval_h_log(z, nodes).to_complex()
        if direct == 0:
            assert via_log == 0
        else:
            assert abs(direct - via_log) <= 1e-12 * abs(direct)

    def test_phase_range(self):
        assert wrap_phase(math.pi) == pytest.approx(math.pi)
        assert wrap_phase(-math.pi) == pytest.approx(math.pi)
        assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_logcomplex_round_trip(self):
        for v in (1 + 2j, -3.0, 1e-300j, -1j):
            assert LogComplex.from_complex(v).to_complex() == pytest.approx(v, rel=1e-15)
        assert LogComplex.from_complex(0).to_complex() == 0


class TestExcluded:
    def test_two_nodes(self):
        assert eval_H_excl(1, 1, TWO).to_complex() == pytest.approx(4, rel=1e-15)
        assert eval_H_excl(2, -1, TWO).to_complex() == pytest.approx(4, rel=1e-15)

    def test_index_range(self):
        with pytest.raises(IndexError):
            eval_H_excl(3, 0, TWO)

    def test_limit_ratio(self, default_nodes):
        j = 5
        a = default_nodes.alpha[j - 1]
        value = eval_H_excl(j, a, default_nodes).log()
        for eps in (1e-6, 1e-8):
            zz = a * (1 + eps)
            ratio = eval_h_log(zz, default_nodes).log() - 2 * cmath.log(1 - zz / a)
            diff = ratio - value
            assert abs(complex(diff.real, wrap_phase(diff.imag))) < 50 * eps

    @settings(max_examples=50, deadline=None)
    @given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False),
           st.integers(1, 12))
    def test_factorization(self, z, j):
        nodes = NodeSystem.geometric(4, 4, 12)
        if np.any(nodes.alpha == z):
            return
        h = eval_h(z, nodes)
        rebuilt = (1 - z / nodes.alpha[j - 1]) ** 2 * eval_H_excl(j, z, nodes).to_complex()
        assert abs(h - rebuilt) <= 1e-10 * abs(h)

    def test_nonzero_at_own_node(self, default_nodes):
        for j in range(1, 13):
            assert eval_H_excl(j, default_nodes.alpha[j - 1], default_nodes).log_mag > -math.inf

    def test_direct_derivative_double_zero(self, default_nodes):
        value, deriv = eval_H_excl_deriv(3, default_nodes.alpha[5], default_nodes)
        assert value == 0 and deriv == 0


class TestLogDerivative:
    def test_single_term(self):
        assert eval_H_excl_logderiv(1, 0, TWO) == pytest.approx(2)

    def test_three_nodes(self):
        assert eval_H_excl_logderiv(2, 0, NodeSystem.explicit([1, -1, 2])) == pytest.approx(-3)

    def test_pole(self):
        with pytest.raises(PoleError):
            eval_H_excl_logderiv(1, -1, TWO)

    def test_finite_difference_at_node(self, default_nodes):
        j = 3
        z = default_nodes.alpha[j - 1]
        h = 1e-6 * abs(z)
        up = eval_H_excl(j, z + h, default_nodes)
        dn = eval_H_excl(j, z - h, default_nodes)
        dlog = (up.log_mag - dn.log_mag) + 1j * wrap_phase(up.phase - dn.phase)
        fd = dlog / (2 * h)
        exact = eval_H_excl_logderiv(j, z, default_nodes)
        assert abs(fd - exact) / abs(exact) <= 1e-7

    def test_random_points(self, default_nodes):
        rng = np.random.default_rng(7)
        z = rng.uniform(-20, 20, 100) + 1j * rng.uniform(-20, 20, 100)
        for j, zz in zip(rng.integers(1, 13, 100), z):
            h = 1e-6 * max(1.0, abs(zz))
            up = eval_H_excl(int(j), zz + h, default_nodes).to_complex()
            dn = eval_H_excl(int(j), zz - h, default_nodes).to_complex()
            mid = eval_H_excl(int(j), zz, default_nodes).to_complex()
            fd = (up - dn) / (2 * h) / mid
            exact = eval_H_excl_logderiv(int(j), zz, default_nodes)
            assert abs(fd - exact) <= 1e-6 * abs(exact)


class TestLemma1:
    def test_inverse_squares(self):
        rep = lemma1_classify(lambda n: 1.0 / n**2, 10_000)
        assert rep.verdict == "both-converge"
        assert abs(rep.partial_products_plus[-1] - math.sinh(math.pi) / math.pi) < 1e-3

    def test_harmonic(self):
        rep = lemma1_classify(lambda n: 1.0 / n, 10_000, start=2)
        assert rep.verdict == "both-diverge"
        assert rep.clause_c == "zero"
        np.testing.assert_allclose(rep.partial_products_minus, 1.0 / rep.n, rtol=1e-13)

    def test_geometric(self):
        rep = lemma1_classify(lambda n: 0.5**n, 60)
        assert rep.verdict == "both-converge"
        assert rep.clause_c == "positive"

    def test_array_input(self):
        rep = lemma1_classify(np.full(100, 0.5))
        assert rep.verdict == "both-diverge"
        assert rep.partial_products_minus[-1] == pytest.approx(0.5**100)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            lemma1_classify([1.0, 0.0, 2.0])

    def test_csv(self):
        text = lemma1_classify(lambda n: 0.5**n, 3).to_csv()
        assert text.splitlines()[0] == "N,sum,prod_plus,prod_minus"
        assert text.splitlines()[1] == "1,0.5,1.5,0.5"
        assert text.endswith("\n") and "\r" not in text
