import numpy as np
import pytest

from podlim.lti import StateSpace, ss_to_tf
from podlim.modal import (DecompositionError, damping_ratio, decompose,
                          mode_shape, performance_vector, real_jordan, residue,
                          rotate_mode)
from podlim.two_machine import TwoMachineParams, build_state_space


def rotation_matrix():
    return np.array([[0.0, 1.0], [-1.0, 0.0]])


def two_machine_A(D=0.0):
    p = TwoMachineParams(M1=2, M2=2, D1=D, D2=D, X1star=0.5, X2star=0.5)
    return build_state_space(p).A


def test_decompose_rotation():
    md = decompose(rotation_matrix())
    np.testing.assert_allclose(sorted(md.lambdas, key=lambda z: z.imag), [-1j, 1j],
                               atol=1e-12)
    np.testing.assert_allclose(md.V.conj().T @ md.U, np.eye(2), atol=1e-12)
    # positive-imag member first
    assert md.lambdas[0].imag > 0


def test_decompose_diagonal():
    md = decompose(np.diag([-1.0, -2.0]))
    # columns are canonical basis vectors up to ordering and scaling
    perm = np.abs(md.U)
    assert np.allclose(perm @ perm.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(sorted(md.lambdas.real), [-2.0, -1.0], atol=1e-12)


def test_decompose_reconstruction():
    rng = np.random.default_rng(1)
    for _ in range(5):
        A = rng.normal(size=(5, 5)) - 2 * np.eye(5)
        md = decompose(A)
        rec = md.U @ np.diag(md.lambdas) @ md.V.conj().T
        assert np.linalg.norm(rec - A, "fro") < 1e-7 * np.linalg.norm(A, "fro")


def test_decompose_two_machine_damped():
    # inter-area pair near -0.025 +- j for M=2, Xsig=1, total D = 0.1
    A = two_machine_A(D=0.05)
    md = decompose(A)
    pair = md.lambdas[np.abs(md.lambdas.imag) > 0.5]
    char = np.roots([1.0, 0.025, 1.0])  # relative subsystem s^2 + (D/M) s + 1
    np.testing.assert_allclose(sorted(pair.imag), sorted(char.imag), rtol=1e-9)
    np.testing.assert_allclose(pair.real, [-0.0125, -0.0125], rtol=1e-9)


def test_decompose_undamped_deflation():
    A = two_machine_A(D=0.0)
    md = decompose(A)
    assert md.deflated != ()
    # deflated columns span the null space of A^2; the eigenpair identity
    # holds for all non-deflated columns
    for i in range(md.n):
        if i in md.deflated:
            continue
        resid = np.linalg.norm(A @ md.U[:, i] - md.lambdas[i] * md.U[:, i])
        assert resid < 1e-8 * np.linalg.norm(A)
    np.testing.assert_allclose(md.V.conj().T @ md.U, np.eye(4), atol=1e-8)


def test_real_jordan_rotation():
    md = decompose(rotation_matrix())
    rj = real_jordan(md)
    blk = rj.Vr.T @ rotation_matrix() @ rj.Ur
    np.testing.assert_allclose(blk, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-10)
    np.testing.assert_allclose(np.linalg.inv(rj.Ur), rj.Vr.T, atol=1e-8)
    assert rj.block_structure == ((0, 2),)


def test_real_jordan_two_machine_damped():
    A = two_machine_A(D=0.05)
    md = decompose(A)
    rj = real_jordan(md)
    J = rj.Vr.T @ A @ rj.Ur
    # off-block residual
    mask = np.ones_like(J, dtype=bool)
    for start, size in rj.block_structure:
        mask[start:start + size, start:start + size] = False
    assert np.max(np.abs(J[mask])) < 1e-8 * np.linalg.norm(A, "fro")
    sizes = sorted(size for _, size in rj.block_structure)
    assert sizes == [1, 1, 2]


def test_real_jordan_block_diagonal_input():
    A = np.zeros((3, 3))
    A[:2, :2] = [[-0.1, 2.0], [-2.0, -0.1]]
    A[2, 2] = -1.0
    md = decompose(A)
    rj = real_jordan(md)
    J = rj.Vr.T @ A @ rj.Ur
    mask = np.ones_like(J, dtype=bool)
    for start, size in rj.block_structure:
        mask[start:start + size, start:start + size] = False
    assert np.max(np.abs(J[mask])) < 1e-10 * np.linalg.norm(A)


def test_rotate_mode_recovers_probe_rotation():
    A = two_machine_A(D=0.0)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    md_rot = rotate_mode(md, i, [2, 3])
    # rotate the already-aligned decomposition: phase must be ~0 (idempotent)
    md_rot2 = rotate_mode(md_rot, i, [2, 3])
    np.testing.assert_allclose(md_rot2.V[:, i], md_rot.V[:, i], atol=1e-12)
    # manual extra phasor is undone by rotation
    U = md_rot.U.copy()
    V = md_rot.V.copy()
    j = md_rot.conjugate_partner(i)
    rot = np.exp(1j * np.pi / 4)
    V[:, i] *= rot; U[:, i] *= rot
    V[:, j] *= np.conj(rot); U[:, j] *= np.conj(rot)
    from dataclasses import replace
    md_twisted = replace(md_rot, U=U, V=V)
    back = rotate_mode(md_twisted, i, [2, 3])
    np.testing.assert_allclose(back.V[:, i], md_rot.V[:, i], atol=1e-10)
    # biorthonormality is preserved
    np.testing.assert_allclose(back.V.conj().T @ back.U, np.eye(4), atol=1e-8)


def test_rotate_mode_preserves_eigenpair():
    A = two_machine_A(D=0.05)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    md_rot = rotate_mode(md, i, [2, 3])
    resid = np.linalg.norm(A @ md_rot.U[:, i] - md_rot.lambdas[i] * md_rot.U[:, i])
    assert resid < 1e-10 * np.linalg.norm(A)


def test_performance_vector_two_machine():
    A = two_machine_A(D=0.0)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    md_rot = rotate_mode(md, i, [2, 3])
    cz = performance_vector(md_rot, i, [2, 3])
    target = np.array([0.0, 0.0, 1.0, -1.0])
    cos = abs(cz @ target) / (np.linalg.norm(cz) * np.linalg.norm(target))
    assert cos > 1.0 - 1e-10
    assert cz[2] > 0  # orientation fixed by the first significant entry


def test_performance_vector_requires_rotation():
    A = two_machine_A(D=0.0)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    # twist so the speed entries are far from the real axis
    from dataclasses import replace
    U = md.U.copy(); V = md.V.copy()
    j = md.conjugate_partner(i)
    rot = np.exp(1j * 1.0)
    V[:, i] *= rot; U[:, i] *= rot
    V[:, j] *= np.conj(rot); U[:, j] *= np.conj(rot)
    with pytest.raises(ValueError):
        performance_vector(replace(md, U=U, V=V), i, [2, 3])


def test_performance_vector_scaling_linearity():
    A = two_machine_A(D=0.0)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    md_rot = rotate_mode(md, i, [2, 3])
    cz = performance_vector(md_rot, i, [2, 3])
    from dataclasses import replace
    U = md_rot.U.copy(); V = md_rot.V.copy()
    j = md_rot.conjugate_partner(i)
    V[:, i] *= 2.0; U[:, i] /= 2.0
    V[:, j] *= 2.0; U[:, j] /= 2.0
    cz2 = performance_vector(replace(md_rot, U=U, V=V), i, [2, 3])
    np.testing.assert_allclose(cz2, 2.0 * cz, rtol=1e-12)


def test_residue_first_order():
    sys = StateSpace([[-1.0]], [[1.0]], [[1.0]])
    md = decompose(sys.A)
    assert residue(sys, md, 0, 0, 0) == pytest.approx(-1.0)


def test_residue_partial_fraction_consistency():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(4, 4)) - 2.5 * np.eye(4)
    sys = StateSpace(A, rng.normal(size=(4, 1)), rng.normal(size=(1, 4)))
    md = decompose(A)
    tf = ss_to_tf(sys, 0, 0)
    for i in range(4):
        lam = md.lambdas[i]
        # numeric residue of tf at lam
        eps = 1e-6 * max(1.0, abs(lam))
        r_num = tf(lam + eps) * eps
        assert abs(residue(sys, md, i, 0, 0) + r_num) < 1e-4 * max(abs(r_num), 1e-12)


def test_residue_sum_completeness():
    rng = np.random.default_rng(13)
    A = rng.normal(size=(5, 5)) - 3.0 * np.eye(5)
    B = rng.normal(size=(5, 1))
    C = rng.normal(size=(1, 5))
    sys = StateSpace(A, B, C)
    md = decompose(A)
    total = sum(residue(sys, md, i, 0, 0) for i in range(5))
    assert total == pytest.approx(-(C @ B).item(), abs=1e-8)


def test_residue_unobservable_mode():
    A = np.diag([-1.0, -2.0])
    sys = StateSpace(A, [[1.0], [1.0]], [[1.0, 0.0]])
    md = decompose(A)
    idx = int(np.argmin(np.abs(md.lambdas + 2.0)))
    assert residue(sys, md, idx, 0, 0) == pytest.approx(0.0, abs=1e-14)


def test_damping_ratio():
    assert damping_ratio(-1.0 + 0j) == pytest.approx(1.0)
    assert damping_ratio(1j) == pytest.approx(0.0)
    assert damping_ratio(-0.1 + 1j) == pytest.approx(0.1 / abs(-0.1 + 1j))
    with pytest.raises(ValueError):
        damping_ratio(0.0)


def test_mode_shape_normalization():
    A = two_machine_A(D=0.05)
    md = decompose(A)
    i = int(np.argmax(md.lambdas.imag))
    shape = mode_shape(md, i, [2, 3], ("m1", "m2"))
    assert np.max(np.abs(shape.components)) == pytest.approx(1.0)
    # opposite phase between the machines
    rel = shape.components[0] / shape.components[1]
    assert rel.real < 0
