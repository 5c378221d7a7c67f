import math

import numpy as np
import pytest
import sympy
from scipy.special import erfinv

from lcritlab.clt import (
    CLTRectangle,
    ExpansionCoefficients,
    clt_fit,
    expansion_eval,
    gaussian_box_integral,
    hermite,
    hermite_box_integral,
    hermite_coefficient_table,
    ks_distance,
    normal_scale_cdf,
)
from lcritlab.errors import DimensionMismatchError

from oracles import gaussian_quadrature_box, hermite_quadrature_box

GAUSS_M1_1 = 0.9878111178151971  # frozen from the quadrature oracle


class TestHermite:
    def test_degree_zero_and_one(self):
        assert hermite(0, 3.7) == 1.0
        assert hermite(1, 3.0) == 6.0

    def test_cubic_value(self):
        # Rodrigues expansion gives 8x^3 - 12x
        assert hermite(3, 2.0) == 40.0

    def test_range_validation(self):
        with pytest.raises(ValueError):
            hermite(41, 0.0)
        with pytest.raises(ValueError):
            hermite(-1, 0.0)

    def test_recurrence_matches_rodrigues_exactly(self):
        x = sympy.symbols("x")
        table = hermite_coefficient_table(8)
        for n in range(9):
            rodrigues = sympy.expand(
                (-1) ** n * sympy.exp(x**2) * sympy.diff(sympy.exp(-(x**2)), x, n)
            )
            mine = sum(c * x**k for k, c in enumerate(table[n]))
            assert sympy.simplify(rodrigues - mine) == 0
            for xv in (-2, -1, 0, 1, 2):
                assert hermite(n, float(xv)) == float(rodrigues.subs(x, xv))

    def test_orthogonality(self):
        nodes, weights = np.polynomial.hermite.hermgauss(64)
        for m in range(11):
            for n in range(11):
                q = float(np.sum(weights * hermite(m, nodes) * hermite(n, nodes)))
                if m == n:
                    expect = 2.0**n * math.factorial(n) * math.sqrt(math.pi)
                    assert abs(q - expect) <= 1e-8 * expect
                else:
                    scale = math.sqrt(
                        2.0**m * math.factorial(m) * 2.0**n * math.factorial(n)
                    ) * math.sqrt(math.pi)
                    assert abs(q) <= 1e-8 * scale


class TestBoxIntegrals:
    def test_full_line(self):
        assert gaussian_box_integral(-math.inf, math.inf) == pytest.approx(1.0, abs=1e-14)

    def test_half_line(self):
        assert gaussian_box_integral(0.0, math.inf) == pytest.approx(0.5, abs=1e-14)

    def test_symmetric_unit_interval(self):
        oracle = gaussian_quadrature_box(-1.0, 1.0)
        assert gaussian_box_integral(-1.0, 1.0) == pytest.approx(oracle, abs=1e-13)
        assert gaussian_box_integral(-1.0, 1.0) == pytest.approx(GAUSS_M1_1, abs=1e-13)

    def test_strictly_increasing_to_one(self):
        # strictness is testable while the tail mass stays above float eps
        xs = np.linspace(0.1, 2.4, 25)
        vals = [gaussian_box_integral(-x, x) for x in xs]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert gaussian_box_integral(-6.0, 6.0) == pytest.approx(1.0, abs=1e-12)

    def test_hermite_box_odd_even_full_line(self):
        assert hermite_box_integral(1, -math.inf, math.inf) == pytest.approx(0.0, abs=1e-14)
        assert hermite_box_integral(2, -math.inf, math.inf) == pytest.approx(0.0, abs=1e-14)

    def test_hermite_box_half_line(self):
        oracle = hermite_quadrature_box(1, 0.0, math.inf)
        mine = hermite_box_integral(1, 0.0, math.inf)
        assert mine == pytest.approx(oracle, abs=1e-12)
        assert mine == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-13)

    @pytest.mark.parametrize("k,a,b", [(0, -0.7, 1.2), (1, -1.0, 0.5), (3, 0.2, 2.0), (5, -2.0, 2.0)])
    def test_against_quadrature(self, k, a, b):
        assert hermite_box_integral(k, a, b) == pytest.approx(
            hermite_quadrature_box(k, a, b), abs=1e-11
        )


class TestExpansion:
    def test_order_zero_is_product_of_gaussians(self):
        coeffs = ExpansionCoefficients(2)
        rect = CLTRectangle(
            log_abs=((-1.0, 1.0), (0.0, 2.0)),
            arg=((-0.5, 0.5), (-2.0, -0.3)),
            psi=(3.0, 5.0),
        )
        expect = (
            gaussian_box_integral(-1, 1)
            * gaussian_box_integral(0, 2)
            * gaussian_box_integral(-0.5, 0.5)
            * gaussian_box_integral(-2, -0.3)
        )
        assert expansion_eval(coeffs, rect) == pytest.approx(expect, abs=1e-14)

    def test_psi_independent_at_order_zero(self):
        coeffs = ExpansionCoefficients(1)
        r1 = CLTRectangle(log_abs=((-1, 1),), arg=((-1, 1),), psi=(2.0,))
        r2 = CLTRectangle(log_abs=((-1, 1),), arg=((-1, 1),), psi=(4.0,))
        assert expansion_eval(coeffs, r1) == expansion_eval(coeffs, r2)

    def test_degenerate_rectangle(self):
        coeffs = ExpansionCoefficients(1)
        rect = CLTRectangle(log_abs=((0.5, 0.5),), arg=((-1, 1),), psi=(2.0,))
        assert expansion_eval(coeffs, rect) == 0.0

    def test_order_one_rejected(self):
        with pytest.raises(ValueError):
            ExpansionCoefficients(1, {((1,), (0,)): 0.25})

    def test_wrong_b00_rejected(self):
        with pytest.raises(ValueError):
            ExpansionCoefficients(1, {((0,), (0,)): 0.5})

    def test_higher_order_entries_change_value(self):
        base = ExpansionCoefficients(1)
        rich = ExpansionCoefficients(1, {((2,), (0,)): 0.1})
        rect = CLTRectangle(log_abs=((-0.3, 1.1),), arg=((-1, 1),), psi=(2.0,))
        assert expansion_eval(rich, rect) != expansion_eval(base, rect)
        assert rich.max_order == 2

    def test_from_config_rows(self):
        c = ExpansionCoefficients.from_config(1, [{"k": [2], "l": [0], "value": 0.05}])
        assert c.entries[((2,), (0,))] == 0.05


class TestFit:
    def make_points(self, n, seed=0):
        u = np.stack(
            [
                np.random.default_rng(seed).random(n),
                np.random.default_rng(seed + 1).random(n),
            ],
            axis=1,
        )
        return erfinv(2 * u - 1) / math.sqrt(math.pi)

    def test_synthetic_exact_law(self):
        pts = self.make_points(10_000) * math.sqrt(math.pi * 1.0)
        report = clt_fit(pts, psi=[1.0])
        assert report.passed
        assert report.max_ks <= 1.63 / math.sqrt(10_000)
        for box in report.boxes:
            assert abs(box.observed - box.predicted) <= 4 * box.std_error

    def test_ks_distance_basics(self):
        xs = np.array([-1.0, 0.0, 1.0])
        d = ks_distance(xs, normal_scale_cdf)
        assert 0 < d < 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            clt_fit(np.zeros((10, 2)), psi=[1.0, 2.0])

    def test_wrong_scale_detected(self):
        pts = self.make_points(10_000)  # misses the sqrt(pi psi) factor
        report = clt_fit(pts, psi=[1.0])
        assert not report.passed
