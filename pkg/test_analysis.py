import numpy as np
import pytest

from analysis.bounds import (
    BoundKind,
    antennas_needed,
    awgn_mfb_ber,
    massive_mimo_asymptote,
    mmse_mf_equivalence_gap,
    required_ebn0_db,
    simo_bound_sinr,
)
from analysis.sinr import (
    BerEstimate,
    SinrReport,
    average_ber,
    ber_from_sinr,
    mmse_sinr_closed_form,
    semi_analytic_ber,
    sinr_df_step,
    sinr_iterative,
    sinr_linear,
    sinr_terms,
)
from detectors import DetectorKind, MFDetector, MMSEDetector, gamma_of
from link.channel import flat_channel, link_budget, sample_channel, triangular_pdp
from link.scenario import Scenario
from utils.errors import AnalysisError
from utils.numerics import SeededRng, db_to_linear, qfunc


def _mmse_identity_gap(ch, alpha):
    D = MMSEDetector().build(ch, alpha)
    general = sinr_linear(ch, D, alpha).per_antenna_sinr
    closed = mmse_sinr_closed_form(gamma_of(D, ch)).per_antenna_sinr
    return np.max(np.abs(general - closed) / closed)


class TestSinrLinear:
    def test_flat_single_antenna_matches_awgn_bound(self):
        N_R, eta = 8, 0.8
        ch = flat_channel(np.ones((N_R, 1)), 256)
        budget = link_budget(1.0, 256, 64, ch.pdp, 3.0)
        sinr = sinr_linear(ch, MFDetector().build(ch), budget.alpha).per_antenna_sinr[0]
        assert budget.eta == eta
        assert sinr == pytest.approx(massive_mimo_asymptote(eta, N_R, budget.ebn0), rel=1e-12)

    def test_interference_free_case(self):
        ch = flat_channel(np.eye(2), 16)
        D = MFDetector().build(ch)
        terms = sinr_terms(D, gamma_of(D, ch), 0.5)
        assert np.all(terms.beta_own == 0) and np.all(terms.beta_cross == 0)
        # N |gamma|^2 / (alpha sum |D|^2) = 16 / (0.5 * 16)
        np.testing.assert_allclose(sinr_linear(ch, D, 0.5).per_antenna_sinr, [2.0, 2.0])

    def test_mmse_closed_form_identity(self, pdp):
        rng = SeededRng(31)
        for N_T, N_R in ((2, 20), (10, 20)):
            ch = sample_channel(pdp, 256, N_T, N_R, rng.child(N_T, N_R))
            assert _mmse_identity_gap(ch, link_budget(1.0, 256, 64, pdp, -3.0).alpha) < 1e-9

    def test_mmse_dominates_mf(self, pdp):
        for r in range(10):
            ch = sample_channel(pdp, 64, 3, 6, SeededRng(40 + r))
            alpha = 4.0
            mf = sinr_linear(ch, MFDetector().build(ch), alpha).per_antenna_sinr
            mmse = sinr_linear(ch, MMSEDetector().build(ch, alpha), alpha).per_antenna_sinr
            assert np.all(mmse >= mf - 1e-9)

    def test_pdp_scale_invariance(self, pdp):
        rng = SeededRng(50)
        base = sample_channel(pdp, 64, 2, 4, rng)
        c = 3.7
        scaled_pdp = pdp.scaled(c)
        scaled = type(base)(base.cir * np.sqrt(c), scaled_pdp)
        a1 = link_budget(1.0, 64, 16, pdp, -2.0).alpha
        a2 = link_budget(1.0, 64, 16, scaled_pdp, -2.0).alpha
        for kind_build in (lambda h, a: MFDetector().build(h), lambda h, a: MMSEDetector().build(h, a)):
            s1 = sinr_linear(base, kind_build(base, a1), a1).per_antenna_sinr
            s2 = sinr_linear(scaled, kind_build(scaled, a2), a2).per_antenna_sinr
            np.testing.assert_allclose(s1, s2, rtol=1e-12)

    def test_alpha_must_be_positive(self, small_channel):
        with pytest.raises(AnalysisError):
            sinr_linear(small_channel, MFDetector().build(small_channel), 0.0)


class TestBerFromSinr:
    def test_reference_points(self):
        est = ber_from_sinr(SinrReport(np.array([0.0, 9.09, 1e6])))
        assert est.per_antenna_ber[0] == 0.5
        assert est.per_antenna_ber[1] == pytest.approx(1.28e-3, rel=0.01)
        assert est.per_antenna_ber[2] < 1e-100
        assert est.mean_ber == pytest.approx(np.mean(est.per_antenna_ber))

    def test_negative_sinr_rejected(self):
        with pytest.raises(AnalysisError):
            ber_from_sinr(SinrReport(np.array([-1.0])))


class TestAverageBer:
    def _est(self, value):
        return BerEstimate(np.array([value]), value)

    def test_single_input(self):
        assert average_ber([self._est(0.1)]).mean_ber == 0.1

    def test_mean_of_two(self):
        avg = average_ber([self._est(0.1), self._est(0.3)])
        assert avg.mean_ber == pytest.approx(0.2)
        assert avg.realizations_averaged == 2

    def test_permutation_invariant(self):
        values = [0.01, 0.2, 0.03, 0.4]
        a = average_ber(self._est(v) for v in values).mean_ber
        b = average_ber(self._est(v) for v in reversed(values)).mean_ber
        assert a == pytest.approx(b, rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(AnalysisError):
            average_ber([])


class TestSinrIterative:
    def test_base_case_is_mf(self, small_channel):
        alpha = 2.0
        reports = sinr_iterative(small_channel, alpha, 4)
        mf = sinr_linear(small_channel, MFDetector().build(small_channel), alpha)
        np.testing.assert_array_equal(reports[0].per_antenna_sinr, mf.per_antenna_sinr)
        assert [r.iteration for r in reports] == [1, 2, 3, 4]
        assert all(r.detector_kind is DetectorKind.IDF for r in reports)

    def test_perfect_feedback_limit(self, small_channel):
        alpha = 2.0
        D = MFDetector().build(small_channel)
        terms = sinr_terms(D, gamma_of(D, small_channel), alpha)
        limit = sinr_df_step(terms, np.full(2, np.inf))
        np.testing.assert_allclose(limit, terms.signal / terms.noise, rtol=1e-12)

    def test_monotone_when_first_iteration_is_good(self, pdp):
        alpha = link_budget(1.0, 256, 64, pdp, -8.0).alpha
        for r in range(20):
            ch = sample_channel(pdp, 256, 10, 100, SeededRng(60).child(r))
            sinr = np.array([rep.per_antenna_sinr for rep in sinr_iterative(ch, alpha, 4)])
            assert np.all(4 * qfunc(np.sqrt(sinr[0])) < 1)
            assert np.all(np.diff(sinr, axis=0) >= -1e-9 * sinr[1:])

    def test_invalid_iteration_count(self, small_channel):
        with pytest.raises(AnalysisError):
            sinr_iterative(small_channel, 1.0, 0)


class TestSemiAnalyticBer:
    def test_entry_counts(self, small_channel):
        assert len(semi_analytic_ber(small_channel, 1.0, "mf")) == 1
        assert len(semi_analytic_ber(small_channel, 1.0, "idf", 3)) == 3

    def test_probabilities_in_range(self, small_channel):
        for est in semi_analytic_ber(small_channel, 50.0, DetectorKind.IDF, 4):
            assert np.all((est.per_antenna_ber >= 0) & (est.per_antenna_ber <= 0.5))


class TestBounds:
    def test_flat_channel_ldb_equals_mfb(self):
        ch = flat_channel(np.ones((4, 1)) * (1 + 1j), 64)
        ldb = simo_bound_sinr(ch, BoundKind.SIMO_LDB, 0.3)
        mfb = simo_bound_sinr(ch, "simo_mfb", 0.3)
        assert ldb == pytest.approx(mfb, rel=1e-12)

    def test_flat_channel_mfb_is_awgn_bound(self):
        N_R = 6
        ch = flat_channel(np.ones((N_R, 1)), 256)
        budget = link_budget(1.0, 256, 64, ch.pdp, -4.0)
        mfb = simo_bound_sinr(ch, BoundKind.SIMO_MFB, budget.alpha)
        awgn = simo_bound_sinr(None, BoundKind.SIMO_AWGN_MFB, eta=budget.eta, ebn0=budget.ebn0, N_R=N_R)
        assert mfb == pytest.approx(awgn, rel=1e-12)

    def test_awgn_example(self):
        sinr = simo_bound_sinr(None, BoundKind.SIMO_AWGN_MFB, eta=0.8, ebn0=10 ** -0.6, N_R=100)
        assert sinr == pytest.approx(40.2, abs=0.05)

    def test_ldb_below_mfb(self, pdp):
        scenario = Scenario(N=256, L_s=64, N_T=1, N_R=4, seed=3)
        alpha = scenario.budget(0.0).alpha
        for r in range(50):
            ch = scenario.channel(r)
            assert simo_bound_sinr(ch, "simo_ldb", alpha) <= simo_bound_sinr(ch, "simo_mfb", alpha) * (1 + 1e-12)

    def test_simo_bounds_need_one_antenna(self, small_channel):
        with pytest.raises(AnalysisError):
            simo_bound_sinr(small_channel, BoundKind.SIMO_MFB, 1.0)

    def test_awgn_curve_is_q_function(self):
        grid = np.arange(-12.0, 1.0)
        expected = qfunc(np.sqrt(2 * 0.8 * 100 * 10 ** (grid / 10)))
        np.testing.assert_allclose(awgn_mfb_ber(0.8, 100, grid), expected, rtol=1e-12, atol=0)

    def test_asymptote_examples(self):
        assert massive_mimo_asymptote(1.0, 1, 1.0) == 2.0
        assert massive_mimo_asymptote(0.8, 100, 0.5) == simo_bound_sinr(
            None, BoundKind.SIMO_AWGN_MFB, eta=0.8, ebn0=0.5, N_R=100)


class TestEquivalenceGap:
    def test_scalar_identity(self):
        h = np.array([[1.0], [1j], [-1.0], [2.0]])
        ch = flat_channel(h, 32)
        assert mmse_mf_equivalence_gap(ch, 0.5) < 1e-12

    def test_unknown_reduction(self, small_channel):
        with pytest.raises(AnalysisError):
            mmse_mf_equivalence_gap(small_channel, 1.0, reduce="median")


class TestRequiredEbn0:
    def test_interpolates_in_log_domain(self):
        grid = [0.0, 1.0]
        assert required_ebn0_db(grid, [1e-2, 1e-4], 1e-3) == pytest.approx(0.5)

    def test_target_not_reached(self):
        assert required_ebn0_db([0.0, 1.0], [1e-1, 5e-2], 1e-3) is None

    def test_already_below_at_first_point(self):
        assert required_ebn0_db([0.0, 1.0], [1e-4, 1e-5], 1e-3) is None


def test_antennas_needed_picks_smallest():
    scenario = Scenario(N=64, L_s=16, N_T=2, N_R=2, seed=5)
    alpha = scenario.budget(0.0).alpha
    bers = {}
    for N_R in (4, 16, 64):
        sc = Scenario(N=64, L_s=16, N_T=2, N_R=N_R, seed=5)
        bers[N_R] = average_ber(semi_analytic_ber(sc.channel(r), alpha, "mf")[0] for r in range(5)).mean_ber
    assert bers[4] > bers[16] >= bers[64]
    # 16 qualifies exactly at its own BER, 4 does not, 64 is larger
    assert antennas_needed(scenario, [64, 4, 16], 0.0, bers[16], "mf", realizations=5) == 16
    assert antennas_needed(scenario, [64, 16], 0.0, bers[4], "mf", realizations=5) == 16
    assert antennas_needed(scenario, [64, 4], 0.0, bers[16], "mf", realizations=5) == 64
    assert antennas_needed(scenario, [4], 0.0, 1e-30, "mf", realizations=2) is None


@pytest.mark.slow
class TestDeskScale:
    def test_mmse_identity_over_many_realizations(self):
        pdp = triangular_pdp()
        alpha = link_budget(1.0, 256, 64, pdp, -3.0).alpha
        for N_T in (2, 10):
            for N_R in (20, 100):
                for r in range(100):
                    ch = sample_channel(pdp, 256, N_T, N_R, SeededRng(2).child(N_T, N_R, r))
                    assert _mmse_identity_gap(ch, alpha) < 1e-9

    def test_ldb_below_mfb_thousand_realizations(self):
        scenario = Scenario(N=256, L_s=64, N_T=1, N_R=8, seed=11)
        alpha = scenario.budget(-6.0).alpha
        for r in range(1000):
            ch = scenario.channel(r)
            assert simo_bound_sinr(ch, "simo_ldb", alpha) <= simo_bound_sinr(ch, "simo_mfb", alpha) * (1 + 1e-12)

    def test_df_beats_mmse_at_three_times_more_antennas(self, desk_scenario):
        channels = [desk_scenario.channel(r) for r in range(30)]
        checked = 0
        for ebn0_db in np.arange(-12.0, 0.5, 1.0):
            alpha = desk_scenario.budget(ebn0_db).alpha
            df = average_ber(semi_analytic_ber(ch, alpha, "idf", 4)[-1] for ch in channels).mean_ber
            mmse = average_ber(semi_analytic_ber(ch, alpha, "mmse")[0] for ch in channels).mean_ber
            if mmse > 1e-1:
                continue
            checked += 1
            if df < 1e-4 and mmse < 1e-4:
                assert df < mmse or abs(df - mmse) <= 0.05 * mmse, (ebn0_db, df, mmse)
            else:
                assert df < mmse, (ebn0_db, df, mmse)
        assert checked == 13

    def test_asymptotic_sinr_convergence(self):
        scenario = Scenario(N=256, L_s=64, N_T=2, N_R=512, seed=17)
        budget = scenario.budget(-20.0)
        asymptote = massive_mimo_asymptote(budget.eta, 512, budget.ebn0)
        ratios = []
        for r in range(200):
            ch = scenario.channel(r)
            ratios.extend(sinr_linear(ch, MFDetector().build(ch), budget.alpha).per_antenna_sinr / asymptote)
        assert 0.95 <= np.median(ratios) <= 1.05

    def test_mmse_approaches_scaled_mf(self):
        medians = {}
        means = []
        for N_R in (8, 64, 512):
            scenario = Scenario(N=256, L_s=64, N_T=2, N_R=N_R, seed=23)
            alpha = scenario.budget(0.0).alpha
            medians[N_R] = np.median([mmse_mf_equivalence_gap(scenario.channel(r), alpha) for r in range(5)])
            if N_R == 512:
                means = [mmse_mf_equivalence_gap(scenario.channel(r), alpha, reduce="mean") for r in range(5)]
        assert medians[8] > medians[64] > medians[512]
        assert medians[512] < 0.2
        assert np.median(means) < 0.1

    def test_massive_mimo_df_close_to_awgn_bound(self):
        """
        N_T=10, N_R=100 within 1 dB of SIMO/AWGN/MFB at BER 1e-3, using DF p=4.

        Plain MF is about 8 dB away here: residual interference leaves an
        SIR near N_R / (N_T - 1) ~ 11, which floors MF close to 1e-3. MF
        alone is checked at N_T=2, N_R=512 below.
        """
        scenario = Scenario(N=256, L_s=64, N_T=10, N_R=100, seed=29)
        grid = np.arange(-16.0, -7.5, 0.5)
        curve = []
        for ebn0_db in grid:
            alpha = scenario.budget(ebn0_db).alpha
            curve.append(average_ber(semi_analytic_ber(scenario.channel(r), alpha, "idf", 4)[-1]
                                     for r in range(20)).mean_ber)
        bound = awgn_mfb_ber(0.8, 100, grid)
        needed = required_ebn0_db(grid, curve, 1e-3)
        reference = required_ebn0_db(grid, bound, 1e-3)
        assert needed is not None and reference is not None
        assert needed - reference <= 1.0

    def test_mf_within_fifth_of_a_db_with_512_antennas(self):
        scenario = Scenario(N=256, L_s=64, N_T=2, N_R=512, seed=31)
        grid = np.arange(-22.0, -15.75, 0.25)
        curve = []
        for ebn0_db in grid:
            alpha = scenario.budget(ebn0_db).alpha
            curve.append(average_ber(semi_analytic_ber(scenario.channel(r), alpha, "mf")[0]
                                     for r in range(10)).mean_ber)
        needed = required_ebn0_db(grid, curve, 1e-3)
        reference = required_ebn0_db(grid, awgn_mfb_ber(0.8, 512, grid), 1e-3)
        assert needed is not None and reference is not None
        assert 0.0 <= needed - reference <= 0.2
