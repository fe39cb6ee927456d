"""Tests for space-time evaluation, blow-up rate, and the weak limit."""

import dataclasses
import math

import numpy as np
import pytest

from llgshrink import (
    IntegrationError,
    ParameterError,
    RangeError,
    TestFunction,
    blowup_table,
    build_geometry,
    bump_testfn,
    circle_convergence_scan,
    eval_solution,
    gaussian_weight_identities,
    grad_magnitude,
    grad_magnitude_fd,
    integrate,
    make_params,
    make_solution,
    max_usable_t,
    phi,
    similarity_variable,
    weak_limit_report,
    weak_limit_scan,
    write_solution_csv,
)

GAPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


@pytest.fixture(scope="module")
def sol_ref(trace_ref):
    return make_solution(trace_ref, T=0.0)


@pytest.fixture(scope="module")
def sol_alpha1(trace_alpha1):
    return make_solution(trace_alpha1, T=0.0)


@pytest.fixture(scope="module")
def sol_weak(trace_weak):
    return make_solution(trace_weak, T=0.0)


class TestEval:
    def test_origin_is_fixed(self, sol_ref):
        assert np.array_equal(eval_solution(sol_ref, 0.0, -1.0), [1.0, 0.0, 0.0])
        assert np.array_equal(eval_solution(sol_ref, 0.0, -1e-6), [1.0, 0.0, 0.0])

    def test_alpha1_closed_form(self, sol_alpha1):
        c = sol_alpha1.params.c
        for x, t in [(0.5, -1.0), (2.0, -1.0), (1.0, -0.25), (3.0, -0.5)]:
            xi = x / math.sqrt(-t)
            psi = c * phi(1.0, xi)
            got = eval_solution(sol_alpha1, x, t)
            want = np.array([math.cos(psi), math.sin(psi), 0.0])
            assert np.max(np.abs(got - want)) < 1e-9

    def test_parity(self, sol_ref):
        plus = eval_solution(sol_ref, 1.7, -0.8)
        minus = eval_solution(sol_ref, -1.7, -0.8)
        assert np.array_equal(minus, plus * np.array([1.0, -1.0, -1.0]))

    def test_time_must_precede_blowup(self, sol_ref):
        with pytest.raises(ParameterError, match="t < T"):
            eval_solution(sol_ref, 0.5, 0.0)
        with pytest.raises(ParameterError, match="t < T"):
            eval_solution(sol_ref, 0.5, 1.0)

    def test_range_error_reports_requirements(self, sol_ref):
        x_max = sol_ref.trace.x_max
        with pytest.raises(RangeError, match="largest usable t") as err:
            eval_solution(sol_ref, 2.0 * x_max, -1.0)
        assert err.value.required_x_max == pytest.approx(2.0 * x_max)

    def test_max_usable_t(self, sol_ref):
        x = 2.0
        t_star = max_usable_t(sol_ref, x)
        assert t_star == pytest.approx(-((x / sol_ref.trace.x_max) ** 2))
        eval_solution(sol_ref, x, t_star - 1e-9)
        with pytest.raises(ParameterError, match="usable for every t"):
            max_usable_t(sol_ref, 0.0)

    def test_scaling_invariance_random(self, sol_ref):
        rng = np.random.default_rng(20260825)
        for _ in range(100):
            xi = rng.uniform(0.1, 8.0)
            gap = rng.uniform(1e-2, 2.0)
            lam = rng.uniform(0.3, 2.5)
            x = xi * math.sqrt(gap)
            a = eval_solution(sol_ref, x, -gap)
            b = eval_solution(sol_ref, lam * x, -(lam**2) * gap)
            assert np.max(np.abs(a - b)) < 1e-9

    def test_translation_invariance(self, trace_ref, sol_ref):
        shifted = make_solution(trace_ref, T=2.0)
        a = eval_solution(sol_ref, 1.3, -0.7)
        b = eval_solution(shifted, 1.3, 2.0 - 0.7)
        assert np.array_equal(a, b)

    def test_similarity_variable_signed(self, sol_ref):
        assert similarity_variable(sol_ref, -2.0, -4.0) == pytest.approx(-1.0)

    def test_blowup_time_must_be_finite(self, trace_ref):
        with pytest.raises(ParameterError, match="finite"):
            make_solution(trace_ref, T=math.inf)


class TestGradient:
    def test_rate_at_origin(self, sol_ref):
        c = sol_ref.params.c
        for gap in (1.0, 1e-2, 1e-4):
            got = grad_magnitude(sol_ref, 0.0, -gap)
            assert abs(got - c / math.sqrt(gap)) <= 1e-12 * c / math.sqrt(gap)

    def test_off_origin_formula(self, sol_ref):
        p = sol_ref.params
        got = grad_magnitude(sol_ref, 1.5, -0.3)
        want = (p.c / math.sqrt(0.3)) * math.exp(p.alpha * 2.25 / 1.2)
        assert got == pytest.approx(want, rel=1e-14)

    def test_divergence_slope_at_fixed_x(self, sol_ref):
        gaps = np.array([1e-2, 3e-3, 1e-3, 3e-4])
        logs = [math.log(grad_magnitude(sol_ref, 1.0, -g)) for g in gaps]
        slope = np.polyfit(1.0 / gaps, logs, 1)[0]
        assert abs(slope - sol_ref.params.alpha / 4.0) < 0.01 * sol_ref.params.alpha / 4.0

    def test_overflow_reported_as_inf(self, sol_ref):
        assert grad_magnitude(sol_ref, 1.0, -1e-6) == math.inf

    @pytest.mark.parametrize(
        "x,t",
        [(0.0, -1.0), (0.5, -1.0), (1.0, -0.25), (2.0, -1.0), (0.3, -0.01), (-0.5, -1.0), (0.01, -1.0)],
    )
    def test_finite_difference_cross_check(self, sol_ref, x, t):
        closed = grad_magnitude(sol_ref, x, t)
        fd = grad_magnitude_fd(sol_ref, x, t)
        assert abs(fd - closed) / closed < 1e-4


class TestCircleConvergence:
    def test_defect_and_distance_vanish(self, sol_ref, lc_ref):
        rows = circle_convergence_scan(sol_ref, lc_ref, 1.0, [-1.0, -0.1, -0.02, -0.009])
        dists = [r.dist_circle for r in rows]
        defects = [r.defect for r in rows]
        assert dists[-1] < 1e-4
        assert defects[-1] < 1e-4
        assert dists[1] > dists[2] > dists[3]
        assert defects[1] > defects[2] > defects[3]
        for r in rows:
            assert r.dist_circle <= r.dist_envelope
            assert r.defect <= 10.0 * r.defect_envelope

    def test_negative_x_mirrors_exactly(self, sol_ref, lc_ref):
        ts = [-1.0, -0.1, -0.02]
        plus = circle_convergence_scan(sol_ref, lc_ref, 1.0, ts)
        minus = circle_convergence_scan(sol_ref, lc_ref, -1.0, ts)
        for a, b in zip(plus, minus):
            assert a.dist_circle == b.dist_circle
            assert a.defect == b.defect

    def test_alpha1_distance_identically_zero(self, sol_alpha1, lc_alpha1):
        rows = circle_convergence_scan(sol_alpha1, lc_alpha1, 1.0, [-1.0, -0.1, -0.05])
        for r in rows:
            assert r.dist_circle <= 1e-12
            assert r.defect <= 1e-9
            assert r.dist_envelope == 0.0

    def test_rejects_origin(self, sol_ref, lc_ref):
        with pytest.raises(ParameterError, match="nonzero"):
            circle_convergence_scan(sol_ref, lc_ref, 0.0, [-1.0])

    def test_rejects_unordered_grid(self, sol_ref, lc_ref):
        with pytest.raises(ParameterError, match="increasing"):
            circle_convergence_scan(sol_ref, lc_ref, 1.0, [-0.1, -1.0])

    def test_infeasible_time_names_last_usable(self, sol_ref, lc_ref):
        with pytest.raises(RangeError, match="largest usable t") as err:
            circle_convergence_scan(sol_ref, lc_ref, 1.0, [-1.0, -1e-4])
        assert err.value.required_x_max > sol_ref.trace.x_max

    def test_mismatched_constants(self, sol_ref, lc_alpha1):
        with pytest.raises(ParameterError, match="do not match"):
            circle_convergence_scan(sol_ref, lc_alpha1, 1.0, [-1.0])


class TestWeakLimit:
    def test_bump_scan_vanishes(self, sol_weak):
        tf = bump_testfn()
        rows = weak_limit_scan(sol_weak, tf, [-g for g in GAPS], target_err=1e-7)
        values = [r.abs_value for r in rows]
        assert values[-1] < 0.05 * tf.l1_norm
        assert values[-1] < 0.5 * values[0]
        # decreasing in magnitude once T - t drops below 0.1
        assert values[1] > values[2] > values[3] > values[4]
        for r in rows:
            assert r.tail_bound == 0.0
            assert r.quad_err < 1e-5

    def test_support_coverage_required(self, sol_weak):
        tf = bump_testfn()
        with pytest.raises(RangeError) as err:
            weak_limit_scan(sol_weak, tf, [-5e-4])
        assert err.value.required_x_max == pytest.approx(0.35 / math.sqrt(5e-4))

    def test_quadrature_tiers_agree(self, sol_weak):
        tf = bump_testfn()
        t = [-1e-2]
        full = weak_limit_scan(sol_weak, tf, t)[0]
        mid = weak_limit_scan(sol_weak, dataclasses.replace(tf, d2f=None), t)[0]
        low = weak_limit_scan(sol_weak, dataclasses.replace(tf, d2f=None, df=None), t)[0]
        assert abs(mid.value - full.value) <= mid.quad_err + full.quad_err
        assert abs(low.value - full.value) <= low.quad_err + full.quad_err
        assert full.quad_err < mid.quad_err < low.quad_err

    def test_unbounded_support_reports_tail(self, sol_weak):
        inv_sqrt3 = 1.0 / math.sqrt(3.0)

        def f(xs):
            xs = np.atleast_1d(np.asarray(xs, dtype=float))
            return np.exp(-xs * xs / 8.0)[:, None] * np.full(3, inv_sqrt3)

        def df(xs):
            xs = np.atleast_1d(np.asarray(xs, dtype=float))
            return (-xs / 4.0 * np.exp(-xs * xs / 8.0))[:, None] * np.full(3, inv_sqrt3)

        tf = TestFunction(
            f=f, df=df, sup_norm=1.0, lipschitz=0.31, l1_norm=math.sqrt(8.0 * math.pi)
        )
        rows = weak_limit_scan(sol_weak, tf, [-1e-1, -1e-2, -1e-3])
        for r in rows:
            assert r.tail_bound > 0.0
            assert r.window[1] == pytest.approx(math.sqrt(-r.t) * sol_weak.trace.x_max)
        assert rows[0].abs_value > rows[1].abs_value > rows[2].abs_value

    def test_wavelength_guard(self):
        p = make_params(0.5, 0.5)
        sparse = integrate(p, 5.0, 1e-8, store_dpsi=5.0, store_dx=10.0)
        sol = make_solution(sparse, T=0.0)
        with pytest.raises(IntegrationError, match="under-resolved"):
            weak_limit_scan(sol, bump_testfn(), [-5e-3])

    def test_testfn_validation(self, sol_weak):
        tf = bump_testfn()
        with pytest.raises(ParameterError, match="sup_norm"):
            weak_limit_scan(sol_weak, dataclasses.replace(tf, sup_norm=0.0), [-0.1])
        with pytest.raises(ParameterError, match="d2f requires df"):
            weak_limit_scan(sol_weak, dataclasses.replace(tf, df=None), [-0.1])

    def test_report_round_trip(self, sol_weak):
        import json

        rows = weak_limit_scan(sol_weak, bump_testfn(), [-1e-1, -1e-2])
        rep = json.loads(json.dumps(weak_limit_report(rows)))
        assert len(rep) == 2
        assert set(rep[0]) == {
            "t", "value", "abs_value", "window", "xi_max",
            "tail_bound", "quad_err", "n_panels",
        }


class TestBumpFactory:
    def test_shape_and_bounds(self):
        tf = bump_testfn()
        assert tf.support == (0.1, 0.35)
        assert tf.sup_norm == 1.0
        assert tf.l1_norm == pytest.approx(0.15086254, abs=1e-6)
        assert tf.lipschitz == pytest.approx(17.54, abs=0.2)
        xs = np.array([0.05, 0.1, 0.225, 0.35, 0.5])
        vals = tf.f(xs)
        assert np.all(vals[[0, 1, 3, 4]] == 0.0)
        assert np.linalg.norm(vals[2]) == pytest.approx(1.0)

    def test_derivatives_match_finite_differences(self):
        tf = bump_testfn()
        xs = np.linspace(0.12, 0.33, 7)
        h = 1e-6
        fd1 = (tf.f(xs + h) - tf.f(xs - h)) / (2.0 * h)
        fd2 = (tf.f(xs + h) - 2.0 * tf.f(xs) + tf.f(xs - h)) / h**2
        assert np.max(np.abs(tf.df(xs) - fd1)) < 1e-4 * tf.lipschitz
        assert np.max(np.abs(tf.d2f(xs) - fd2)) < 1e-2 * np.max(np.abs(fd2)) + 1e-3

    def test_validation(self):
        with pytest.raises(ParameterError, match="a < b"):
            bump_testfn(0.5, 0.1)
        with pytest.raises(ParameterError, match="nonzero 3-vector"):
            bump_testfn(direction=(0.0, 0.0, 0.0))
        with pytest.raises(ParameterError, match="amplitude"):
            bump_testfn(amplitude=-1.0)


class TestGaussianIdentities:
    @pytest.mark.parametrize("alpha,t", [(0.5, 0.3), (1.0, 1.0), (0.3, 2.0)])
    def test_quadrature_matches_closed_forms(self, alpha, t):
        d = gaussian_weight_identities(alpha, t)
        assert d["gauss_rel_err"] < 1e-10
        assert d["abs_weight_rel_err"] < 1e-10
        assert d["gauss_exact_full_line"] == pytest.approx(
            2.0 * math.sqrt(math.pi * t / alpha), rel=1e-15
        )
        assert d["gauss_exact_half_line"] == pytest.approx(
            math.sqrt(math.pi * t / alpha), rel=1e-15
        )
        assert d["abs_weight_exact"] == pytest.approx(4.0 * t / alpha, rel=1e-15)

    def test_validation(self):
        with pytest.raises(ParameterError, match="alpha"):
            gaussian_weight_identities(1.5, 1.0)
        with pytest.raises(ParameterError, match="t must be positive"):
            gaussian_weight_identities(0.5, 0.0)


class TestBlowup:
    def test_rate_table(self, sol_ref):
        c = sol_ref.params.c
        rows = blowup_table(sol_ref, [-1.0, -1e-2, -1e-4])
        grads = [r.grad_mag for r in rows]
        assert grads[0] < grads[1] < grads[2]
        for r in rows:
            assert r.scaled == pytest.approx(c, rel=1e-12)
            assert r.grad_mag == pytest.approx(c / math.sqrt(r.gap), rel=1e-12)

    def test_off_origin_scaled_value(self, sol_ref):
        p = sol_ref.params
        rows = blowup_table(sol_ref, [-0.5], x=1.0)
        assert rows[0].scaled == pytest.approx(p.c * math.exp(p.alpha / 2.0), rel=1e-12)


class TestCsv:
    def test_rows_and_determinism(self, sol_ref, lc_ref, tmp_path):
        geom = build_geometry(lc_ref)
        path = tmp_path / "slice.csv"
        write_solution_csv(sol_ref, geom, str(path), [-1.0, -0.1], [-1.0, 0.0, 0.5])
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x,m1,m2,m3,dist_circle,grad_mag"
        assert len(lines) == 1 + 6
        data = np.loadtxt(str(path), delimiter=",", skiprows=1)
        assert data.shape == (6, 7)
        origin = data[1]
        assert tuple(origin[2:5]) == (1.0, 0.0, 0.0)
        for row in data:
            assert row[6] == pytest.approx(
                grad_magnitude(sol_ref, row[1], row[0]), rel=1e-12
            )
            assert 0.0 <= row[5] <= math.sqrt(2.0)
        first = path.read_bytes()
        write_solution_csv(sol_ref, geom, str(path), [-1.0, -0.1], [-1.0, 0.0, 0.5])
        assert path.read_bytes() == first

    def test_infeasible_pair_rejected(self, sol_ref, lc_ref, tmp_path):
        geom = build_geometry(lc_ref)
        path = tmp_path / "bad.csv"
        with pytest.raises(RangeError):
            write_solution_csv(sol_ref, geom, str(path), [-1e-6], [5.0])
        assert not path.exists()
