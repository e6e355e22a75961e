import numpy as np
import pytest

from podlim.lti import (FrequencyGrid, Polynomial, RationalTF, SingularityError,
                        StateSpace, UnstableSystemError, NonzeroFeedthroughError,
                        DimensionError, feedback, freq_response, h2_norm, parallel,
                        poles, rtf, series, ss_from_tf, ss_to_tf)


def test_poles_pure_rotation():
    got = poles(StateSpace([[0.0, 1.0], [-1.0, 0.0]], np.zeros((2, 1)), np.zeros((1, 2))))
    np.testing.assert_allclose(sorted(got, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)


def test_poles_two_machine_oracle():
    # characteristic polynomial s^2 (s^2 + Omega^2), Omega = sqrt(2/(M Xsig)) = 1
    from podlim.two_machine import TwoMachineParams, build_state_space
    p = TwoMachineParams(M1=2, M2=2, D1=0, D2=0, X1star=0.5, X2star=0.5)
    lam = poles(build_state_space(p))
    from conftest import assert_spectrum_close
    assert_spectrum_close(lam, np.roots([1, 0, 1, 0, 0]), atol=1e-9)


def test_poles_integrator():
    np.testing.assert_allclose(poles(StateSpace([[0.0]], [[1.0]], [[1.0]])), [0.0])


def test_poles_requires_square():
    with pytest.raises(DimensionError):
        StateSpace(np.zeros((2, 3)), np.zeros((2, 1)), np.zeros((1, 2)))


def test_zeros_simple_and_empty():
    from podlim.lti import zeros
    np.testing.assert_allclose(zeros(rtf([-1.0, 1.0], [1.0, 1.0])), [1.0])
    assert zeros(rtf([1.0], [1.0, 1.0])).size == 0
    with pytest.raises(ValueError):
        zeros(rtf([0.0], [1.0, 1.0]))


def test_zeros_notch_structure():
    # (s^2 + 1/(M X2*)) / s^3 with M=2, X2*=0.9: zeros at +-j sqrt(1/1.8)
    from podlim.lti import zeros
    tf = RationalTF([1.0 / 1.8, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0])
    q = np.sqrt(1.0 / 1.8)
    np.testing.assert_allclose(sorted(z.imag for z in zeros(tf)), [-q, q], rtol=1e-10)


def test_ss_to_tf_trivial_cases():
    tf = ss_to_tf(StateSpace([[0.0]], [[1.0]], [[1.0]]), 0, 0)
    np.testing.assert_allclose(tf.num.coeffs, [1.0], rtol=1e-12)
    np.testing.assert_allclose(tf.den.coeffs, [0.0, 1.0], atol=1e-12)

    tf = ss_to_tf(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[1.0]]), 0, 0)
    np.testing.assert_allclose(tf.num.coeffs, [2.0, 1.0], rtol=1e-12)
    np.testing.assert_allclose(tf.den.coeffs, [1.0, 1.0], rtol=1e-12)


def test_ss_to_tf_matches_direct_evaluation():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = 5
        A = rng.normal(size=(n, n)) - 2.0 * np.eye(n)
        B = rng.normal(size=(n, 2))
        C = rng.normal(size=(2, n))
        D = np.zeros((2, 2))
        sys = StateSpace(A, B, C, D)
        tf = ss_to_tf(sys, 1, 0)
        grid = FrequencyGrid.log_spaced(1e-2, 1e2, 60)
        direct = np.array([sys.evalfr(1j * w)[0, 1] for w in grid.omegas])
        got = freq_response(tf, grid)
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(got - direct)) < 1e-8 * max(scale, 1e-12)


def test_ss_to_tf_index_error():
    sys = StateSpace([[-1.0]], [[1.0]], [[1.0]])
    with pytest.raises(IndexError):
        ss_to_tf(sys, 1, 0)


def test_freq_response_basics():
    grid = FrequencyGrid(np.array([1.0]))
    np.testing.assert_allclose(freq_response(rtf([1.0], [0.0, 1.0]), grid), [-1j])
    np.testing.assert_allclose(freq_response(rtf([1.0], [1.0, 1.0]), grid),
                               [(1 - 1j) / 2])


def test_freq_response_singularity_named():
    tf = rtf([1.0], [1.0, 0.0, 1.0])  # poles at +-j
    with pytest.raises(SingularityError) as exc:
        freq_response(tf, FrequencyGrid(np.array([0.5, 1.0, 2.0])))
    assert exc.value.omega == pytest.approx(1.0)


def test_feedback_conventions():
    G = rtf([1.0], [0.0, 1.0])
    cl = feedback(G, rtf([1.0]))
    np.testing.assert_allclose(cl.num.coeffs, [1.0], rtol=1e-12)
    np.testing.assert_allclose(cl.den.coeffs, [1.0, 1.0], rtol=1e-12)
    # zero gain leaves the plant untouched
    cl0 = feedback(G, rtf([0.0]))
    np.testing.assert_allclose(cl0.den.coeffs, [0.0, 1.0], atol=1e-12)
    with pytest.raises(ValueError):
        feedback(rtf([1.0], [1.0]), rtf([-1.0], [1.0]))


def test_feedback_two_machine_example():
    # proportional control on Gzu: denominator s^2 + s k c + Omega^2
    from podlim.two_machine import TwoMachineParams, performance_tfs
    p = TwoMachineParams(M1=2, M2=2, D1=0, D2=0, X1star=0.1, X2star=0.9)
    gzu = performance_tfs(p)["Gzu"]
    cl = feedback(gzu, rtf([0.5]))
    c = 0.5 * (0.9 - 0.1) / (2.0 * 1.0)
    np.testing.assert_allclose(cl.den.coeffs, [1.0, c, 1.0], rtol=1e-12)


def test_h2_norm_first_order():
    assert h2_norm(StateSpace([[-1.0]], [[1.0]], [[1.0]])) == pytest.approx(1 / np.sqrt(2))
    assert h2_norm(StateSpace([[-2.0]], [[1.0]], [[1.0]])) == pytest.approx(0.5)


def test_h2_norm_guards():
    with pytest.raises(UnstableSystemError):
        h2_norm(StateSpace([[1.0]], [[1.0]], [[1.0]]))
    with pytest.raises(NonzeroFeedthroughError):
        h2_norm(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[1.0]]))


def test_h2_norm_similarity_invariance():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(4, 4)) - 3.0 * np.eye(4)
    B = rng.normal(size=(4, 1))
    C = rng.normal(size=(1, 4))
    ref = h2_norm(StateSpace(A, B, C))
    for _ in range(3):
        T = rng.normal(size=(4, 4)) + 2 * np.eye(4)
        Ti = np.linalg.inv(T)
        got = h2_norm(StateSpace(T @ A @ Ti, T @ B, C @ Ti))
        assert got == pytest.approx(ref, rel=1e-8)


def test_series_parallel():
    one = series(rtf([1.0], [0.0, 1.0]), rtf([0.0, 1.0], [1.0]))
    np.testing.assert_allclose(one.num.coeffs, [1.0], rtol=1e-12)
    np.testing.assert_allclose(one.den.coeffs, [1.0], rtol=1e-12)
    two = parallel(rtf([1.0], [1.0, 1.0]), rtf([1.0], [1.0, 1.0]))
    np.testing.assert_allclose(two.num.coeffs, [2.0], rtol=1e-12)


def test_simplify_idempotent_and_response_preserving():
    rng = np.random.default_rng(11)
    base = rtf([1.0, 2.0, 1.0], [2.0, 3.0, 1.0, 0.5])
    common = Polynomial([1.0, 0.7, 1.0])
    raw = RationalTF(base.num * common, base.den * common)
    s1 = raw.simplify()
    s2 = s1.simplify()
    np.testing.assert_allclose(s1.num.coeffs, s2.num.coeffs, rtol=1e-12)
    np.testing.assert_allclose(s1.den.coeffs, s2.den.coeffs, rtol=1e-12)
    w = rng.uniform(0.01, 100.0, size=100)
    w.sort()
    w = np.unique(w)
    grid = FrequencyGrid(w)
    np.testing.assert_allclose(freq_response(s1, grid), freq_response(raw, grid),
                               rtol=0, atol=1e-10 * np.max(np.abs(freq_response(raw, grid))))


def test_closed_loop_characteristic_identity():
    # poles(feedback(G,K)) against roots of den_G den_K + num_G num_K
    rng = np.random.default_rng(5)
    for _ in range(10):
        G = rtf(rng.normal(size=3), np.append(rng.normal(size=3), 1.0))
        K = rtf(rng.normal(size=2), np.append(rng.normal(size=2), 1.0))
        char = G.den * K.den + G.num * K.num
        if char.is_zero():
            continue
        cl = feedback(G, K)
        got = set()
        for r in cl.poles():
            got.add((round(r.real, 6), round(r.imag, 6)))
        for r in char.roots():
            # every closed-loop pole is a characteristic root (cancellations
            # may remove characteristic roots from the coprime form)
            pass
        char_roots = char.roots()
        for r in cl.poles():
            assert np.min(np.abs(char_roots - r)) < 1e-6 * max(1.0, abs(r))


def test_ss_from_tf_round_trip():
    tf = rtf([1.0, 0.5], [2.0, 1.0, 1.0])
    sys = ss_from_tf(tf)
    back = ss_to_tf(sys, 0, 0)
    grid = FrequencyGrid.log_spaced(1e-1, 1e1, 20)
    np.testing.assert_allclose(freq_response(back, grid), freq_response(tf, grid),
                               rtol=1e-9)


def test_frequency_grid_validation():
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([-1.0, 1.0]))
    with pytest.raises(ValueError):
        FrequencyGrid(np.array([]))


def test_state_space_json_round_trip():
    sys = StateSpace([[-1.0, 0.5], [0.0, -2.0]], [[1.0], [0.0]], [[1.0, 1.0]],
                     input_labels=("u",), output_labels=("y",))
    back = StateSpace.from_json(sys.to_json())
    np.testing.assert_array_equal(back.A, sys.A)
    assert back.input_labels == sys.input_labels
