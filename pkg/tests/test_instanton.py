import numpy as np
import pytest

from painleve_instanton.errors import NoConvergence, PoleAtEndpoint
from painleve_instanton.instanton import (BvpConfig, DualitySign, ProfileKind,
                                          ProfileTriple, asd_closed_profile,
                                          asd_rhs, closed_form_profile,
                                          coeff_K, conserved_tr,
                                          duality_residual, endpoint_series,
                                          solve_bvp)

SD = DualitySign.SELF_DUAL
ASD = DualitySign.ANTI_SELF_DUAL


def test_coeff_K_values():
    assert abs(coeff_K(1, 0.5) - 105 / 32) < 1e-15
    assert coeff_K(3, 1.0) == 0.0
    with pytest.raises(PoleAtEndpoint):
        coeff_K(2, 1.0)
    with pytest.raises(PoleAtEndpoint):
        coeff_K(1, 0.0)


def test_asd_rhs_fixed_point():
    assert np.allclose(asd_rhs(SD, 0.37, (1.0, 1.0, 1.0)), 0.0)
    assert np.allclose(asd_rhs(ASD, 0.37, (1.0, 1.0, 1.0)), 0.0)


def test_asd_rhs_hopf_slope():
    hopf = closed_form_profile(ProfileKind.HOPF_SD)
    rhs = asd_rhs(SD, 0.5, hopf.values(0.5))
    assert abs(rhs[0] - 192 / 169) < 1e-13
    assert np.allclose(rhs, hopf.derivative(0.5), atol=1e-13)


def test_asd_rhs_direct_value():
    rhs = asd_rhs(ASD, 0.5, (1.0, 0.0, 0.0))
    assert abs(rhs[0] - 64 / 105) < 1e-15


def test_closed_form_values():
    triv = closed_form_profile(ProfileKind.TRIVIAL)
    for t in (0.1, 0.5, 0.9):
        assert np.array_equal(triv.values(t), [1.0, 1.0, 1.0])
    em3 = closed_form_profile(ProfileKind.E_MINUS_3)
    assert np.allclose(em3.values(1.0), [0.0, -3.0, 0.0])
    hopf = closed_form_profile(ProfileKind.HOPF_SD)
    assert np.allclose(hopf.values(0.0), [-3.0, 0.0, 0.0])


def test_closed_form_derivatives_match_fd(rng):
    h = 1e-6
    for kind in ProfileKind:
        if kind is ProfileKind.NUMERIC:
            continue
        prof = closed_form_profile(kind)
        for t in rng.uniform(0.1, 0.9, 5):
            fd = (prof.values(t + h) - prof.values(t - h)) / (2 * h)
            assert np.max(np.abs(prof.derivative(t) - fd)) < 1e-8


def test_duality_residuals_closed_forms(rng):
    triv = closed_form_profile(ProfileKind.TRIVIAL)
    hopf = closed_form_profile(ProfileKind.HOPF_SD)
    em3 = closed_form_profile(ProfileKind.E_MINUS_3)
    for t in rng.uniform(0.05, 0.95, 100):
        assert np.allclose(duality_residual(triv, SD, t), 0.0)
        assert np.allclose(duality_residual(triv, ASD, t), 0.0)
        assert np.max(np.abs(duality_residual(hopf, SD, t))) < 1e-12
        assert np.max(np.abs(duality_residual(em3, ASD, t, global_negation=True))) < 1e-12


def test_sign_orbit_property(rng):
    # flipping exactly two signs of a solution preserves the branch
    for signs in ((-1, -1, -1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)):
        prof = ProfileTriple(kind=ProfileKind.E_MINUS_3, n=3,
                             component_signs=signs)
        for t in rng.uniform(0.05, 0.95, 20):
            assert np.max(np.abs(duality_residual(prof, ASD, t))) < 1e-12


def test_endpoint_series_t0():
    s = endpoint_series(1, "t0", 2, (1.0, 0.0))
    assert np.allclose(s.constant_terms, [1.0, 1.0, 1.0])
    # p is the shared value a2(0) = a3(0)
    s = endpoint_series(3, "t0", 2, (2.0, 2.0))
    assert np.allclose(s.constant_terms, [1.0, 2.0, 2.0])


def test_endpoint_series_t1():
    s = endpoint_series(3, "t1", 1, (-1.5,))
    assert np.allclose(s.constant_terms, [0.0, 3.0, 0.0])


def test_endpoint_series_matches_closed_form():
    ref = asd_closed_profile(3)
    s0 = endpoint_series(3, "t0", 12, (2.0, 2.0))
    s1 = endpoint_series(3, "t1", 12, (-1.5,))
    for t in (0.02, 0.08):
        assert np.max(np.abs(s0.eval(t) - ref.values(t))) < 1e-12
    for t in (0.92, 0.98):
        assert np.max(np.abs(s1.eval(t) - ref.values(t))) < 1e-12


def test_endpoint_series_residual_order():
    # truncated series residual scales like t^order near the endpoint
    def residual(s, t):
        da = np.array([np.polyval(np.polyder(c[::-1]), t) for c in s.coeffs])
        a = s.eval(t)
        return max(abs(-0.5 * coeff_K(i + 1, t) * da[i]
                       - (a[(i + 1) % 3] * a[(i + 2) % 3] - a[i]))
                   for i in range(3))

    low = endpoint_series(5, "t0", 2, (2.8, 4.8))
    ratio = residual(low, 0.02) / residual(low, 0.004)
    assert ratio > 0.5 * 5.0**2
    high = endpoint_series(5, "t0", 8, (2.8, 4.8))
    assert residual(high, 0.01) < 1e-10


def test_solve_bvp_n1():
    prof = solve_bvp(BvpConfig(n=1))
    for t in np.linspace(0.05, 0.95, 21):
        assert np.max(np.abs(prof.values(t) - 1.0)) < 1e-8
    assert abs(prof.meta["p"] - 1.0) < 1e-9
    assert abs(prof.meta["q"] - 1.0) < 1e-9


def test_solve_bvp_n3_matches_closed_form():
    prof = solve_bvp(BvpConfig(n=3))
    ref = closed_form_profile(ProfileKind.E_MINUS_3)
    # discover the per-component sign pattern, then compare sup-norm
    signs = np.sign(prof.values(0.5) * ref.values(0.5))
    worst = 0.0
    for t in np.linspace(0.05, 0.95, 41):
        worst = max(worst, np.max(np.abs(prof.values(t) - signs * ref.values(t))))
    assert worst < 1e-7
    # the discovered pattern is an odd number of flips of the printed form
    assert int(np.sum(signs < 0)) % 2 == 1


def test_solve_bvp_grid_residual(prof5):
    for prof in (solve_bvp(BvpConfig(n=3)), prof5):
        for k in range(2, len(prof.ts) - 2):
            t = prof.ts[k]
            if not 1e-3 < t < 1 - 1e-3:
                continue  # pole-adjacent boundary layer: roundoff x K-pole
            assert np.max(np.abs(duality_residual(prof, ASD, t))) < 1e-8


def test_solve_bvp_boundary_data(prof5):
    a0 = prof5.values(0.0)
    a1 = prof5.values(1.0)
    assert abs(a0[0] - 1.0) < 1e-8
    assert abs(a0[1] - a0[2]) < 1e-8
    assert np.max(np.abs(a1 - np.array([0.0, 5.0, 0.0]))) < 1e-8


def test_solve_bvp_no_convergence():
    with pytest.raises(NoConvergence):
        solve_bvp(BvpConfig(n=3, seed=(40.0, -30.0, 55.0), max_iter=2))


def test_bvp_config_validation():
    with pytest.raises(ValueError):
        BvpConfig(n=2).validate()
    with pytest.raises(ValueError):
        BvpConfig(n=3, grid_size=32).validate()
    with pytest.raises(ValueError):
        BvpConfig(n=3, series_order=1).validate()


def test_conserved_tr_values():
    triv = closed_form_profile(ProfileKind.TRIVIAL)
    em3 = closed_form_profile(ProfileKind.E_MINUS_3)
    for t in (0.2, 0.5, 0.8):
        assert abs(conserved_tr(triv, t) - 1 / 8) < 1e-12
        assert abs(conserved_tr(em3, t) - 9 / 8) < 1e-12


def test_conserved_tr_hopf_constant():
    hopf = closed_form_profile(ProfileKind.HOPF_SD)
    assert abs(conserved_tr(hopf, 0.3) - conserved_tr(hopf, 0.7)) < 1e-9


def test_conserved_tr_drift_over_grid():
    for prof in (closed_form_profile(ProfileKind.TRIVIAL),
                 closed_form_profile(ProfileKind.E_MINUS_3),
                 closed_form_profile(ProfileKind.HOPF_SD)):
        vals = [conserved_tr(prof, t) for t in np.linspace(0.05, 0.95, 50)]
        assert max(vals) - min(vals) < 1e-6 * abs(vals[0])


def test_profile_serialization():
    prof = closed_form_profile(ProfileKind.TRIVIAL)
    csv = prof.to_csv([0.25, 0.5])
    assert csv.splitlines()[0] == "t,a1,a2,a3"
    assert csv.splitlines()[1] == "0.25,1,1,1"
    js = prof.to_json([0.5])
    assert '"kind": "trivial"' in js and '"sign_convention"' in js
