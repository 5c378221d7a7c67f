import math

import numpy as np
import pytest

from lcritlab.arith import characters_mod, primes_up_to
from lcritlab.errors import EmptyDomainError
from lcritlab.specs import (
    LFunctionSpec,
    beta_array,
    beta_coeff,
    get_spec,
    register_spec,
    ry_eval,
    selberg_cross_sum,
    selberg_partial_sum,
)


@pytest.fixture(scope="module")
def zeta():
    return get_spec("zeta")


@pytest.fixture(scope="module")
def chi4():
    return get_spec("dirichlet:q=4:index=1")


class TestBetaCoeff:
    def test_zeta_r3(self, zeta):
        assert beta_coeff(zeta, 5, 3) == pytest.approx(1.0 / 3.0)

    def test_chi4_square(self, chi4):
        # chi(3) = -1, so beta(9) = chi(3)^2 / 2 = 1/2
        assert beta_coeff(chi4, 3, 2) == pytest.approx(0.5)

    def test_zeta_bound_at_2(self, zeta):
        v = beta_coeff(zeta, 2, 1)
        assert v == pytest.approx(1.0)
        assert abs(v) <= 1.0 * 2**0 + 1e-15

    def test_rejects_composite(self, zeta):
        with pytest.raises(EmptyDomainError):
            beta_coeff(zeta, 6, 1)

    def test_coefficient_bound_shipped_specs(self):
        # |beta(p^r)| <= (d/r) p^{r eta} with d = 1, eta = 0 for everything shipped
        primes = primes_up_to(10_000).primes
        labels = ["zeta"] + [
            f"dirichlet:q={q}:index={i}"
            for q in (3, 4, 5, 8, 12, 16, 29, 100)
            for i in range(len(characters_mod(q)))
        ]
        for label in labels:
            spec = get_spec(label)
            for r in (1, 2, 3, 7, 20):
                b = beta_array(spec, primes, r)
                assert np.max(np.abs(b)) <= 1.0 / r + 1e-14, (label, r)


class TestRyEval:
    def test_empty_sum(self, zeta):
        assert ry_eval(zeta, 1.5, 1.0) == 0

    def test_primes_up_to_3(self, zeta):
        assert ry_eval(zeta, 3.0, 1.0) == pytest.approx(1 / 2 + 1 / 3)

    def test_includes_prime_power_4(self, zeta):
        assert ry_eval(zeta, 4.0, 1.0) == pytest.approx(1 / 2 + 1 / 3 + 0.5 / 4)

    def test_additive_under_splitting(self, zeta):
        s = 0.8 + 3.7j
        full = ry_eval(zeta, 500.0, s)
        head = ry_eval(zeta, 100.0, s)
        table = primes_up_to(500)
        tail = 0.0 + 0.0j
        for r in range(1, 9):
            for p in table.primes:
                if 100.0 < float(p) ** r <= 500.0:
                    tail += beta_coeff(zeta, int(p), r) * complex(p) ** complex(-r * s)
        assert full == pytest.approx(head + tail, abs=1e-12)

    def test_requires_positive_real_part(self, zeta):
        with pytest.raises(ValueError):
            ry_eval(zeta, 10.0, -0.5 + 1j)


class TestSelbergSums:
    def test_small_example(self, zeta):
        assert selberg_partial_sum(zeta, 3.0) == pytest.approx(1 / 2 + 1 / 3)

    def test_sum_to_100(self, zeta, prime_table_1e5):
        direct = sum(1.0 / p for p in trial_primes_100())
        assert selberg_partial_sum(zeta, 100.0, table=prime_table_1e5) == pytest.approx(direct)

    def test_empty_domain(self, zeta):
        with pytest.raises(EmptyDomainError):
            selberg_partial_sum(zeta, 1.5)

    def test_slope_fits_xi(self, zeta, prime_table_1e6):
        # least-squares slope of the partial sum against log log x
        xs = [10**3, 10**4, 10**5, 10**6]
        ys = [selberg_partial_sum(zeta, x, table=prime_table_1e6) for x in xs]
        ll = [math.log(math.log(x)) for x in xs]
        slope = np.polyfit(ll, ys, 1)[0]
        assert abs(slope - zeta.xi) < 0.1

    def test_cross_sum_stays_bounded(self, zeta, chi4, prime_table_1e6):
        # off-diagonal orthogonality: the cross sum does not track log log x
        diag = [selberg_partial_sum(zeta, x, table=prime_table_1e6) for x in (10**3, 10**6)]
        cross = [
            abs(selberg_cross_sum(zeta, chi4, x, table=prime_table_1e6))
            for x in (10**3, 10**6)
        ]
        assert diag[1] - diag[0] > 0.5 * (math.log(math.log(10**6)) - math.log(math.log(10**3)))
        assert cross[1] - cross[0] < 0.1


def trial_primes_100():
    return [n for n in range(2, 101) if all(n % m for m in range(2, n)) ]


class TestRamanujanOnAverage:
    def test_alpha_square_sum_growth(self, prime_table_1e6):
        # sum_{p<=x} sum_i |alpha_i(p)|^2 <= C x^{1.01} with one fitted constant
        spec = get_spec("zeta")
        xs = [10**2, 10**3, 10**4]
        cs = []
        for x in xs:
            ps = prime_table_1e6.up_to(x)
            lhs = float(np.sum(np.abs(spec.alpha(ps)) ** 2))
            cs.append(lhs / x**1.01)
        c_fit = max(cs)
        for x in (10**5,):
            ps = prime_table_1e6.up_to(x)
            lhs = float(np.sum(np.abs(spec.alpha(ps)) ** 2))
            assert lhs <= c_fit * x**1.01


class TestRegistry:
    def test_zeta_constants(self, zeta):
        assert (zeta.degree, zeta.eta, zeta.xi) == (1, 0.0, 1.0)

    def test_dirichlet_label_parsing(self):
        spec = get_spec("dirichlet:q=5:index=2")
        assert spec.degree == 1
        with pytest.raises(ValueError):
            get_spec("dirichlet:q=200:index=0")
        with pytest.raises(ValueError):
            get_spec("dirichlet:q=4:index=9")
        with pytest.raises(KeyError):
            get_spec("maass:levle=1")

    def test_user_registration(self):
        class Doubled:
            degree = 2

            def alpha(self, primes):
                return np.ones((len(primes), 2), dtype=np.complex128)

        spec = LFunctionSpec(label="test:doubled", degree=2, coeffs=Doubled(), eta=0.0, xi=2.0)
        register_spec(spec)
        assert get_spec("test:doubled") is spec
        assert beta_coeff(spec, 3, 2) == pytest.approx(1.0)

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            LFunctionSpec(label="bad", degree=0, coeffs=None)
