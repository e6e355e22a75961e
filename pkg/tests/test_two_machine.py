import numpy as np
import pytest

from podlim.lti import FrequencyGrid, freq_response, poles, ss_to_tf, zeros
from podlim.two_machine import (OrderingError, ParameterError, TwoMachineParams,
                                UnsupportedConfigurationError, build_state_space,
                                interarea_frequency, performance_tfs,
                                zero_frequencies)


def params(M=2.0, D=0.0, X1=0.1, X2=0.9):
    return TwoMachineParams(M1=M, M2=M, D1=D, D2=D, X1star=X1, X2star=X2)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        TwoMachineParams(M1=2, M2=2, D1=0, D2=0, X1star=0.0, X2star=0.9)
    with pytest.raises(ParameterError):
        TwoMachineParams(M1=-1, M2=2, D1=0, D2=0, X1star=0.1, X2star=0.9)


def test_state_space_eigenvalues():
    lam = poles(build_state_space(params(X1=0.5, X2=0.5)))
    from conftest import assert_spectrum_close
    assert_spectrum_close(lam, np.roots([1.0, 0, 1.0, 0, 0]), atol=1e-9)  # s^2 (s^2+1)


def test_damped_interarea_pair_moves_left():
    lam = poles(build_state_space(params(D=0.05)))
    pair = lam[np.abs(lam.imag) > 0.5]
    assert np.all(pair.real < 0)
    assert np.max(pair.real) > -0.05  # small damping only


def test_interarea_frequency():
    assert interarea_frequency(params()) == pytest.approx(1.0)
    assert interarea_frequency(params(X1=0.25, X2=0.25)) == pytest.approx(np.sqrt(2))
    p = TwoMachineParams(M1=1, M2=1, D1=0, D2=0, X1star=1.0, X2star=1.0)
    assert interarea_frequency(p) == pytest.approx(1.0)
    with pytest.raises(UnsupportedConfigurationError):
        interarea_frequency(TwoMachineParams(M1=1, M2=2, D1=0, D2=0,
                                             X1star=0.5, X2star=0.5))


def test_performance_tfs_against_state_space():
    p = params()
    tfs = performance_tfs(p)
    ss = build_state_space(p, include_relative_speed=True)
    grid = FrequencyGrid(np.logspace(-2, 2, 200) * (1 + 1.37e-9))
    chan = {"Gzd1": (0, "z"), "Gzd2": (1, "z"), "Gzu": (2, "z"),
            "Gyd1": (0, "theta"), "Gyd2": (1, "theta"), "Gyu": (2, "theta")}
    for name, (i, out) in chan.items():
        tf = ss_to_tf(ss, i, ss.output_index(out))
        a = freq_response(tf, grid)
        b = freq_response(tfs[name], grid)
        scale = np.max(np.abs(b))
        assert np.max(np.abs(a - b)) < 1e-8 * scale, name


def test_performance_tfs_refuses_damped():
    with pytest.raises(UnsupportedConfigurationError):
        performance_tfs(params(D=0.05))


def test_midpoint_uncontrollable():
    tfs = performance_tfs(params(X1=0.5, X2=0.5))
    assert tfs["Gzu"].is_zero()


def test_antisymmetry_of_z_channels():
    tfs = performance_tfs(params())
    total = tfs["Gzd1"] + tfs["Gzd2"]
    assert total.is_zero()


def test_gzu_numerator_coefficient():
    # consistent with the transfer matrix: coefficient (X2*-X1*)/(M Xsig*)
    p = params()
    gzu = performance_tfs(p)["Gzu"]
    np.testing.assert_allclose(gzu.num.coeffs, [0.0, (0.9 - 0.1) / 2.0], rtol=1e-14)


def test_zero_frequencies_and_window():
    q1, q2 = zero_frequencies(params())
    np.testing.assert_allclose((q1, q2), (np.sqrt(1 / 1.8), np.sqrt(1 / 0.2)),
                               rtol=1e-12)
    tfs = performance_tfs(params())
    z1 = zeros(tfs["Gyd1"])
    np.testing.assert_allclose(sorted(abs(z) for z in z1), [q1, q1], rtol=1e-9)
    # interlacing against the mode frequency
    omega = interarea_frequency(params())
    assert omega / np.sqrt(2) <= q1 < q2


def test_zero_frequencies_window_collapses_at_midpoint():
    q1, q2 = zero_frequencies(params(X1=0.499999, X2=0.500001))
    assert q2 - q1 < 1e-5
    with pytest.raises(OrderingError):
        zero_frequencies(params(X1=0.9, X2=0.1))


def test_zero_frequency_interlacing_random():
    rng = np.random.default_rng(0)
    for _ in range(25):
        x1 = rng.uniform(0.02, 0.49)
        x2 = rng.uniform(x1 + 1e-3, 1.5)
        M = rng.uniform(0.5, 8.0)
        p = TwoMachineParams(M1=M, M2=M, D1=0, D2=0, X1star=x1, X2star=x2)
        q1, q2 = zero_frequencies(p)
        omega = interarea_frequency(p)
        assert omega / np.sqrt(2) <= q1 * (1 + 1e-10) < q2


def test_theta_feedthrough_only_from_pu():
    ss = build_state_space(params())
    it = ss.output_index("theta")
    np.testing.assert_allclose(ss.D[it], [0.0, 0.0, 0.1 * 0.9 / 1.0], rtol=1e-14)
    assert np.all(ss.D[:it] == 0.0)


def test_theta_dot_output():
    p = params()
    ss = build_state_space(p, include_theta_dot=True)
    row = ss.C[ss.output_index("theta_dot")]
    np.testing.assert_allclose(row, [0.0, 0.0, 0.9, 0.1], rtol=1e-14)
    assert np.all(ss.D[ss.output_index("theta_dot")] == 0.0)


def test_json_round_trip():
    p = params(D=0.05)
    back = TwoMachineParams.from_json(p.to_json())
    assert back == p
