"""Eigenstructure analysis: modal coordinates, real Jordan form, residues.

The decomposition keeps complex-conjugate eigenvalue pairs adjacent (positive
imaginary part first) and takes left eigenvectors as V = U^{-H}, so V^H U = I
holds by construction. Repeated zero eigenvalues of undamped swing models
(angle reference plus average speed) are handled by a documented deflation:
those columns are replaced by an orthonormal basis of the null space of A^2,
with the Jordan-chain column exempt from the eigenpair identity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ModalDecomposition",
    "RealJordanTransform",
    "ModeShape",
    "DecompositionError",
    "decompose",
    "real_jordan",
    "rotate_mode",
    "residue",
    "performance_vector",
    "damping_ratio",
    "mode_shape",
]


class DecompositionError(ValueError):
    """A is defective or too ill conditioned to diagonalize."""


@dataclass(frozen=True)
class ModalDecomposition:
    """Eigenvalues with biorthonormal right (U) and left (V) eigenvectors.

    V^H U = I; complex pairs are adjacent with lambdas[i+1] = conj(lambdas[i]).
    ``deflated`` lists columns assigned from null-space deflation of repeated
    zero eigenvalues; the second column of such a pair is a Jordan-chain
    vector, not an eigenvector.
    """

    lambdas: np.ndarray
    U: np.ndarray
    V: np.ndarray
    deflated: tuple = ()

    @property
    def n(self):
        return self.lambdas.size

    def conjugate_partner(self, i):
        """Index of the conjugate pair member of mode i, or None if real."""
        lam = self.lambdas[i]
        if lam.imag == 0.0:
            return None
        j = i + 1 if lam.imag > 0 else i - 1
        if 0 <= j < self.n and np.isclose(self.lambdas[j], np.conj(lam)):
            return j
        raise DecompositionError(f"mode {i} has no adjacent conjugate partner")


@dataclass(frozen=True)
class RealJordanTransform:
    """Real block-diagonalizing transform: Vr^T A Ur block diagonal, Ur^{-1} = Vr^T."""

    Vr: np.ndarray
    Ur: np.ndarray
    block_structure: tuple


@dataclass(frozen=True)
class ModeShape:
    mode_index: int
    machine_labels: tuple
    components: np.ndarray  # complex, normalized to max magnitude 1

    def to_csv_rows(self):
        rows = []
        for label, c in zip(self.machine_labels, self.components):
            rows.append((label, c.real, c.imag, abs(c), np.degrees(np.angle(c))))
        return rows


def _pair_sort(lambdas, U):
    """Adjacent conjugate ordering: sort by (|Im|, Re), positive Im first."""
    idx = np.lexsort((np.sign(-lambdas.imag), lambdas.real, np.abs(lambdas.imag)))
    return lambdas[idx], U[:, idx]


def decompose(A, zero_tol=None):
    """Biorthonormal modal decomposition of a real square matrix.

    Raises DecompositionError if the eigenvector matrix condition number
    exceeds 1e8, except for the documented repeated-zero deflation (at most
    one defective zero pair, replaced by null-space basis vectors).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DecompositionError("A must be square")
    norm_a = np.linalg.norm(A, 2) or 1.0
    if zero_tol is None:
        zero_tol = 1e-9 * norm_a

    lambdas, U = np.linalg.eig(A)
    lambdas, U = _pair_sort(lambdas, U)

    deflated = ()
    near_zero = np.where(np.abs(lambdas) <= zero_tol)[0]
    if near_zero.size == 2:
        # repeated zero of the undamped swing model: geometric multiplicity
        # may be 1, so rebuild the columns from the null spaces of A and A^2
        _, sv, vt = np.linalg.svd(A)
        k1 = int(np.sum(sv <= zero_tol))
        _, sv2, vt2 = np.linalg.svd(A @ A)
        k2 = int(np.sum(sv2 <= zero_tol * norm_a))
        if k1 == 1 and k2 == 2:
            q1 = vt[-1, :]
            null_a2 = vt2[-2:, :].T
            # chain vector: the part of null(A^2) orthogonal to the eigenvector
            proj = null_a2 - np.outer(q1, q1 @ null_a2)
            uu, ss, _ = np.linalg.svd(proj, full_matrices=False)
            if ss[0] < 1e-8:
                raise DecompositionError("could not separate the zero Jordan chain")
            q2 = uu[:, 0]
            i, j = int(near_zero[0]), int(near_zero[1])
            U[:, i] = q1
            U[:, j] = q2
            lambdas[i] = 0.0
            lambdas[j] = 0.0
            deflated = (i, j)
    elif near_zero.size > 2:
        raise DecompositionError("more than two near-zero eigenvalues; not supported")

    cond = np.linalg.cond(U)
    if cond > 1e8:
        raise DecompositionError(f"eigenvector matrix condition number {cond:.3e} exceeds 1e8; "
                                 "A is defective or nearly so")
    V = np.linalg.inv(U).conj().T
    md = ModalDecomposition(lambdas=lambdas, U=U, V=V, deflated=deflated)

    resid = np.linalg.norm(U @ np.diag(lambdas) @ V.conj().T - A, "fro")
    if deflated == () and resid > 1e-7 * max(np.linalg.norm(A, "fro"), 1e-30):
        raise DecompositionError(f"reconstruction residual {resid:.3e} too large")
    return md


def real_jordan(md):
    """Real Jordan transform from a modal decomposition.

    Complex pairs map to 2x2 blocks [[sigma, mu], [-mu, sigma]] (mu > 0), real
    modes to scalars. Vr rows come from [Re v, Im v]; Ur := (Vr^T)^{-1} so the
    inverse identity holds by construction. Defective deflated pairs keep
    their Jordan coupling in the off-block residual.
    """
    n = md.n
    Vr = np.zeros((n, n))
    blocks = []
    i = 0
    while i < n:
        lam = md.lambdas[i]
        if lam.imag != 0.0:
            j = md.conjugate_partner(i)
            if j != i + 1:
                raise DecompositionError("conjugate pair not adjacent")
            Vr[:, i] = md.V[:, i].real
            Vr[:, i + 1] = md.V[:, i].imag
            blocks.append((i, 2))
            i += 2
        else:
            v = md.V[:, i]
            k = int(np.argmax(np.abs(v)))
            if abs(v[k]) > 0:
                v = v * np.exp(-1j * np.angle(v[k]))
            if np.max(np.abs(v.imag)) > 1e-8 * max(np.max(np.abs(v.real)), 1e-300):
                raise DecompositionError(f"real mode {i} has an irreducibly complex eigenvector")
            Vr[:, i] = v.real
            blocks.append((i, 1))
            i += 1
    Ur = np.linalg.inv(Vr.T)
    return RealJordanTransform(Vr=Vr, Ur=Ur, block_structure=tuple(blocks))


def _principal_phase(entries):
    """Rotation phase aligning a sign-pattern vector with the real axis.

    Uses the principal direction sum(v_k^2) so antisymmetric mode shapes
    (entries of both signs) do not cancel; the residual pi ambiguity is fixed
    by making the first significant entry real positive.
    """
    q = np.sum(entries ** 2)
    if abs(q) < 1e-12 * float(np.sum(np.abs(entries) ** 2)):
        raise ValueError("degenerate rotation: speed entries have no principal direction")
    phi = -0.5 * np.angle(q)
    rotated = entries * np.exp(1j * phi)
    scale = np.max(np.abs(rotated))
    for c in rotated:
        if abs(c) > 0.1 * scale:
            if c.real < 0:
                phi += np.pi
            break
    return phi


def rotate_mode(md, mode_index, speed_state_indices):
    """Rotate one conjugate pair so its speed entries align with the real axis.

    Multiplies v_i (and compensates u_i) by a unit phasor; the conjugate
    partner is rotated conjugately, so V^H U = I is preserved exactly.
    """
    speed_state_indices = list(speed_state_indices)
    if not speed_state_indices:
        raise ValueError("speed_state_indices must be nonempty")
    j = md.conjugate_partner(mode_index)
    if j is None:
        raise ValueError("mode_index must identify a member of a complex pair")
    i = mode_index if md.lambdas[mode_index].imag > 0 else j
    j = i + 1

    entries = md.V[speed_state_indices, i]
    phi = _principal_phase(entries)
    rot = np.exp(1j * phi)

    U = md.U.copy()
    V = md.V.copy()
    V[:, i] *= rot
    U[:, i] *= rot
    V[:, j] *= np.conj(rot)
    U[:, j] *= np.conj(rot)
    return replace(md, U=U, V=V)


def residue(sys, md, mode_index, in_idx, out_idx):
    """Mode residue -C_row u_i (v_i^H B_col), feedback-aligned sign convention.

    The partial-fraction residue of the (in, out) channel at lambda_i equals
    minus the returned value.
    """
    if not (0 <= in_idx < sys.n_inputs and 0 <= out_idx < sys.n_outputs):
        raise IndexError("channel indices out of range")
    c = sys.C[out_idx, :]
    b = sys.B[:, in_idx]
    u = md.U[:, mode_index]
    v = md.V[:, mode_index]
    return complex(-(c @ u) * (np.conj(v) @ b))


def performance_vector(md, mode_index, speed_state_indices):
    """Real row C_z = Re(v_i)^T of a rotated inter-area left eigenvector.

    z = C_z x then isolates the damping-torque modal coordinate. Raises if the
    mode has not been rotated (speed entries not aligned with the real axis).
    """
    speed_state_indices = list(speed_state_indices)
    j = md.conjugate_partner(mode_index)
    if j is None:
        raise ValueError("mode_index must identify a member of a complex pair")
    i = mode_index if md.lambdas[mode_index].imag > 0 else j
    entries = md.V[speed_state_indices, i]
    phi = _principal_phase(entries)
    if min(abs(phi), abs(abs(phi) - 2 * np.pi)) > 1e-9:
        raise ValueError("mode is not rotated; call rotate_mode first "
                         f"(residual phase {phi:.3e} rad)")
    return md.V[:, i].real.copy()


def damping_ratio(lam):
    """zeta = -Re(lambda)/|lambda|."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("damping ratio undefined for lambda = 0")
    return float(-lam.real / abs(lam))


def mode_shape(md, mode_index, speed_state_indices, machine_labels):
    """Speed-entry mode shape of the right eigenvector, max magnitude 1."""
    speed_state_indices = list(speed_state_indices)
    comp = md.U[speed_state_indices, mode_index].copy()
    peak = np.max(np.abs(comp))
    if peak == 0:
        raise ValueError("mode has zero speed components")
    comp = comp / peak
    return ModeShape(mode_index=mode_index, machine_labels=tuple(machine_labels),
                     components=comp)
