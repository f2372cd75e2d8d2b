"""Tests for state construction and the three kick-to-kick maps."""

import math

import numpy as np
import pytest
from scipy import special

from relrotor import (
    NR,
    REL,
    REL_APPROX,
    BasisWindow,
    DimensionlessParams,
    SpectralState,
    WindowExhaustionError,
    auto_window,
    initial_state,
    make_plan,
    step,
    step_nr,
    step_rel,
    step_rel_approx,
    with_theory,
)

PAPER = DimensionlessParams(2e-7, 1e-7, 1e6)
WIN96 = BasisWindow(0, 96)


def random_state(window, theory, seed, rng=None):
    rng = rng or np.random.default_rng(seed)
    c = rng.normal(size=window.size) + 1j * rng.normal(size=window.size)
    c /= np.linalg.norm(c)
    return SpectralState(window, c, 0, theory)


class TestInitialState:
    def test_center_magnitude_before_renormalization(self):
        # pre-renormalization magnitude at n = nbar is the Gaussian prefactor
        # (2 sigma0^2 / pi)^(1/4) = 0.79894158... at sigma0 = 0.8
        prefactor = (2.0 * 0.64 / math.pi) ** 0.25
        assert abs(prefactor - 0.79894158024369484) < 1e-12
        st = initial_state(0.8, math.pi, 48, WIN96, NR)
        n = WIN96.qs()
        raw = np.exp(-0.64 * (n - 48.0) ** 2)
        # renormalization divided out prefactor * sqrt(sum raw^2): undo it
        pre_renorm = np.abs(st.coeffs) * prefactor * math.sqrt(float(np.sum(raw**2)))
        assert abs(pre_renorm[48] - prefactor) < 1e-12
        assert np.max(np.abs(pre_renorm - prefactor * raw)) < 1e-12

    def test_theta_pi_alternating_phase(self):
        st = initial_state(0.8, math.pi, 48, WIN96, NR)
        mags = np.abs(st.coeffs)
        keep = mags > 1e-12
        signs = st.coeffs[keep] / mags[keep]
        n = WIN96.qs()[keep]
        expected = np.where(n % 2 == 0, 1.0, -1.0)
        assert np.max(np.abs(signs - expected)) < 1e-12

    def test_unit_norm(self):
        st = initial_state(0.8, math.pi, 48, WIN96, NR)
        assert abs(st.norm() - 1.0) < 1e-15
        assert st.kick_count == 0

    def test_window_too_narrow(self):
        with pytest.raises(ValueError, match=r"\[38, 58\]"):
            initial_state(0.8, math.pi, 48, BasisWindow(40, 60), NR)

    def test_validation(self):
        with pytest.raises(ValueError):
            initial_state(-0.5, 1.0, 0, BasisWindow(-40, 40), NR)
        with pytest.raises(ValueError):
            initial_state(0.8, -0.1, 0, BasisWindow(-40, 40), NR)
        with pytest.raises(ValueError):
            initial_state(0.8, 2.0 * math.pi, 0, BasisWindow(-40, 40), NR)


class TestStepNR:
    def test_kappa_zero_is_phase_only(self):
        params = DimensionlessParams(0.1, 0.0, 2.5)
        win = BasisWindow(-12, 12)
        plan = make_plan(params, win)
        st = random_state(win, NR, 1)
        out = step_nr(st, plan)
        assert np.array_equal(out.coeffs, st.coeffs * plan.phases.nr_factor)
        assert np.max(np.abs(np.abs(out.coeffs) - np.abs(st.coeffs))) <= 1e-16
        assert out.kick_count == 1

    def test_norm_preserved_paper_params(self):
        plan = make_plan(PAPER, WIN96)
        st = initial_state(0.8, math.pi, 48, WIN96, NR)
        for _ in range(5):
            before = st.norm()
            st = step_nr(st, plan)
            assert abs(st.norm() - before) < 1e-13

    def test_single_mode_brute_force_oracle(self):
        # one occupied mode: output is i^{r-5} J_{r-5}(2) e^{-i tau r^2/2}
        params = DimensionlessParams(0.3, 2.0, 1.75)
        win = BasisWindow(-20, 30)
        plan = make_plan(params, win, boundary_tail_threshold=0.5)
        c = np.zeros(win.size, dtype=complex)
        c[win.index_of(5)] = 1.0
        out = step_nr(SpectralState(win, c, 0, NR), plan)
        bw = plan.kernel.bandwidth
        for i, r in enumerate(range(win.q_min, win.q_max + 1)):
            expected = complex(1j ** ((r - 5) % 4)) * float(
                special.jn(r - 5, 2.0)
            ) * plan.phases.nr_factor[i]
            if abs(r - 5) <= bw:
                assert abs(out.coeffs[i] - expected) < 1e-14
            else:
                # beyond the band the kernel truncates; dropped terms are
                # bounded by the truncation budget
                assert out.coeffs[i] == 0.0
                assert abs(expected) < math.sqrt(plan.kernel.tol)

    def test_wrong_theory_rejected(self):
        plan = make_plan(PAPER, WIN96)
        st = initial_state(0.8, math.pi, 48, WIN96, REL)
        with pytest.raises(ValueError, match="NR"):
            step_nr(st, plan)


class TestStepREL:
    def test_nr_limit_matches_step_nr(self):
        params_tiny = DimensionlessParams(1e-15, 1.3, 4.0)
        win = BasisWindow(-15, 15)
        plan = make_plan(params_tiny, win, boundary_tail_threshold=0.5)
        st = random_state(win, NR, 7)
        out_nr = step_nr(st, plan)
        out_rel = step_rel(with_theory(st, REL), plan)
        assert np.max(np.abs(out_rel.coeffs - out_nr.coeffs)) < 1e-10

    def test_fast_vs_direct_named_instance(self):
        params = DimensionlessParams(0.3, 2.0, 1.0)
        win = BasisWindow(-64, 64)  # 129 modes
        st = random_state(win, REL, 42)
        fast = step_rel(st, make_plan(params, win, method="fast",
                                      boundary_tail_threshold=0.999))
        direct = step_rel(st, make_plan(params, win, method="direct",
                                        boundary_tail_threshold=0.999))
        assert np.max(np.abs(fast.coeffs - direct.coeffs)) < 1e-12

    def test_self_check_mode_runs_clean(self):
        params = DimensionlessParams(0.3, 2.0, 1.0)
        win = BasisWindow(-20, 20)
        plan = make_plan(params, win, self_check=True, boundary_tail_threshold=0.999)
        st = random_state(win, REL, 3)
        out = step_rel(st, plan)
        assert out.kick_count == 1

    def test_norm_after_1000_kicks_paper_params(self):
        plan = make_plan(PAPER, WIN96)
        st = initial_state(0.8, math.pi, 48, WIN96, REL)
        for _ in range(1000):
            st = step_rel(st, plan)
        assert abs(st.norm() - 1.0) < 1e-12


class TestStepRELApprox:
    def test_gamma_underflow_identical_to_nr(self):
        # gamma so small the correction underflows to exactly zero
        params = DimensionlessParams(1e-300, 0.9, 2.0)
        win = BasisWindow(-10, 10)
        plan = make_plan(params, win, boundary_tail_threshold=0.5)
        st = random_state(win, NR, 11)
        out_nr = step_nr(st, plan)
        out_ap = step_rel_approx(with_theory(st, REL_APPROX), plan)
        assert np.array_equal(out_nr.coeffs, out_ap.coeffs)

    def test_one_kick_matches_rel_paper_params(self):
        plan = make_plan(PAPER, WIN96)
        st = initial_state(0.8, math.pi, 48, WIN96, REL)
        out_rel = step_rel(st, plan)
        out_ap = step_rel_approx(with_theory(st, REL_APPROX), plan)
        assert np.max(np.abs(out_rel.coeffs - out_ap.coeffs)) < 1e-10


class TestProperties:
    def test_unitarity_random_instances(self):
        # a kernel truncated at squared-mass tol drops amplitudes ~sqrt(tol),
        # so strict 1e-13 unitarity needs the tighter kernel below
        rng = np.random.default_rng(2026)
        for _ in range(25):
            n = int(rng.integers(4, 80))
            qmin = int(rng.integers(-50, 10))
            win = BasisWindow(qmin, qmin + n - 1)
            params = DimensionlessParams(
                float(10.0 ** rng.uniform(-8, 0)),
                float(rng.uniform(0, 4)),
                float(10.0 ** rng.uniform(-2, 4)),
            )
            plan = make_plan(params, win, boundary_tail_threshold=0.999999,
                             kernel_tol=1e-30)
            st = random_state(win, NR, None, rng)
            out = step_nr(st, plan)
            # mass balance: in-window norm plus dropped boundary mass is unit
            assert abs(out.norm() + out.boundary_tail_mass - st.norm()) < 1e-13

    def test_mass_balance_scales_with_sqrt_kernel_tol(self):
        win = BasisWindow(-30, 30)
        st = random_state(win, NR, 13)
        params = DimensionlessParams(0.1, 2.0, 3.0)
        plan = make_plan(params, win, boundary_tail_threshold=0.999999,
                         kernel_tol=1e-16)
        out = step_nr(st, plan)
        assert abs(out.norm() + out.boundary_tail_mass - st.norm()) < 3e-8

    def test_theory_convergence_quadratic_in_gamma(self):
        # fixed q-support small enough that the phase gap stays linearized
        win = BasisWindow(-20, 20)
        st = random_state(win, NR, 5)
        dists = []
        for gamma in (1e-3, 1e-4, 1e-5):
            params = DimensionlessParams(gamma, 1.0, 1.0)
            plan = make_plan(params, win, boundary_tail_threshold=0.999)
            d = np.max(np.abs(
                step_rel(with_theory(st, REL), plan).coeffs
                - step_nr(st, plan).coeffs
            ))
            dists.append(float(d))
        assert dists[1] < 2e-2 * dists[0]
        assert dists[2] < 2e-2 * dists[1]

    def test_composition_bit_determinism(self):
        plan = make_plan(PAPER, WIN96)
        runs = []
        for _ in range(2):
            st = initial_state(0.8, math.pi, 48, WIN96, REL)
            for _ in range(20):
                st = step_rel(st, plan)
            runs.append(st.coeffs)
        assert np.array_equal(runs[0], runs[1])

    def test_phase_only_all_maps_at_zero_kick_strength(self):
        params = DimensionlessParams(0.2, 0.0, 3.7)
        win = BasisWindow(-8, 8)
        plan = make_plan(params, win)
        base = random_state(win, NR, 9)
        for theory, stepper in ((NR, step_nr), (REL, step_rel),
                                (REL_APPROX, step_rel_approx)):
            out = stepper(with_theory(base, theory), plan)
            assert np.max(np.abs(np.abs(out.coeffs) - np.abs(base.coeffs))) <= 5e-16


class TestWindowHandling:
    def test_exhaustion_raises_with_kick_index(self):
        params = DimensionlessParams(0.1, 3.0, 1.0)
        win = BasisWindow(-9, 9)
        plan = make_plan(params, win, boundary_tail_threshold=1e-12)
        st = random_state(win, NR, 21)
        with pytest.raises(WindowExhaustionError) as err:
            step_nr(st, plan)
        assert err.value.kick_index == 1
        assert err.value.tail_mass > 1e-12

    def test_auto_window_paper_packet(self):
        win = auto_window(PAPER, 0.8, 48, 509, 1e-20)
        assert win.contains(BasisWindow(38, 58))

    def test_auto_window_degenerate_threshold(self):
        win = auto_window(PAPER, 0.8, 48, 10, 0.5)
        assert win.q_min <= 48 <= win.q_max

    def test_paper_run_boundary_mass_stays_tiny(self):
        plan = make_plan(PAPER, WIN96, boundary_tail_threshold=1e-12)
        st = initial_state(0.8, math.pi, 48, WIN96, NR)
        worst = 0.0
        for _ in range(1000):
            st = step_nr(st, plan)
            worst = max(worst, st.boundary_tail_mass)
        assert worst < 1e-16

    def test_step_dispatch(self):
        plan = make_plan(PAPER, WIN96)
        st = initial_state(0.8, math.pi, 48, WIN96, REL_APPROX)
        out = step(st, plan)
        assert out.theory == REL_APPROX and out.kick_count == 1


class TestSpectralStateValidation:
    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="window size"):
            SpectralState(BasisWindow(0, 4), np.ones(3, dtype=complex), 0, NR)

    def test_non_finite(self):
        c = np.ones(5, dtype=complex)
        c[2] = np.nan
        with pytest.raises(ValueError, match="finite"):
            SpectralState(BasisWindow(0, 4), c, 0, NR)

    def test_unknown_theory(self):
        with pytest.raises(ValueError, match="theory"):
            SpectralState(BasisWindow(0, 4), np.ones(5, dtype=complex), 0, "BOGUS")
