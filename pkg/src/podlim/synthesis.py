"""Controller and filter design: PSS lead-lag tuning, H2 synthesis, reduction.

Two design families:

* PSS-style controllers: a differentiator-input lead-lag cascade with squared
  low-pass and wash-out factors, tuned from the residue angle so feedback at
  the target mode frequency pushes the eigenvalue straight left.

* H2-optimal output feedback on a weighted extended plant (two algebraic
  Riccati equations, observer + state feedback). The same machinery covers
  the estimation-only (filter) configuration by routing the "control" input
  into the error channel instead of the plant.

All controllers follow the package-wide u = -K y convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lti import (DimensionError, FrequencyGrid, Polynomial, RationalTF,
                  StateSpace, closed_loop_matrix, h2_norm, poles,
                  remove_unobservable)

__all__ = [
    "PssDesign",
    "ExtendedPlantSpec",
    "H2Result",
    "SynthesisError",
    "pss_controller",
    "tune_phase_compensation",
    "root_locus",
    "RootLocus",
    "build_extended_plant",
    "build_estimation_plant",
    "h2_synthesize",
    "filter_from_result",
    "diag_ss",
    "prefilter_channels",
    "reduce_order",
    "max_grid_error",
    "pade_delay",
    "series_ss",
]


class SynthesisError(ValueError):
    """Design assumptions violated (rank, stabilizability, phase range...)."""


# ---------------------------------------------------------------------------
# PSS-style controller
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PssDesign:
    """Lead-lag damping controller parameters.

    k_pss   gain (pu/rad)
    T1, T2  lead-lag time constants (s), > 0
    Omega1  target mode frequency (rad/s), > 0
    lp_corner_mult       low-pass corner = mult * Omega1 (applied twice)
    washout_corner_mult  wash-out corner = mult * Omega1
    """

    k_pss: float
    T1: float
    T2: float
    Omega1: float
    lp_corner_mult: float = 5.0
    washout_corner_mult: float = 0.2

    def __post_init__(self):
        if self.T1 <= 0 or self.T2 <= 0:
            raise SynthesisError("lead-lag time constants must be positive")
        if self.Omega1 <= 0:
            raise SynthesisError("target frequency must be positive")
        if self.lp_corner_mult <= 0 or self.washout_corner_mult <= 0:
            raise SynthesisError("corner multipliers must be positive")


def pss_controller(d):
    """K = s k (s T1 + 1)/(s T2 + 1) (a/(s+a))^2 (s/(s+b)).

    a = lp_corner_mult*Omega1, b = washout_corner_mult*Omega1. Strictly proper
    by construction with a double zero at the origin, so K(0) = 0 exactly (no
    steady-state power offset).
    """
    a = d.lp_corner_mult * d.Omega1
    b = d.washout_corner_mult * d.Omega1
    num = (Polynomial([0.0, d.k_pss]) * Polynomial([1.0, d.T1])
           * Polynomial([a * a]) * Polynomial([0.0, 1.0]))
    den = (Polynomial([1.0, d.T2]) * Polynomial([a, 1.0]) * Polynomial([a, 1.0])
           * Polynomial([b, 1.0]))
    K = RationalTF(num, den)
    if d.k_pss != 0.0 and not K.is_strictly_proper():
        raise SynthesisError("PSS cascade must be strictly proper")
    return K


def _wrap_angle(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def tune_phase_compensation(res, Omega1, structure):
    """(T1, T2) making arg(R K(j Omega1)) = -pi for the PSS cascade.

    The lead-lag peak is centered on Omega1: alpha = T1/T2 follows from the
    required phase via alpha = (1 + sin phi)/(1 - sin phi), T2 = 1/(Omega1
    sqrt(alpha)). A single stage covers |phi| < 90 degrees; beyond that a
    multi-stage design would be needed and an error is raised.
    """
    res = complex(res)
    if res == 0:
        raise SynthesisError("zero residue: channel does not act on the mode")
    if structure.k_pss <= 0:
        raise SynthesisError("tuning assumes a positive gain template")
    fixed = pss_controller(PssDesign(k_pss=structure.k_pss, T1=1.0, T2=1.0,
                                     Omega1=Omega1,
                                     lp_corner_mult=structure.lp_corner_mult,
                                     washout_corner_mult=structure.washout_corner_mult))
    jw = 1j * Omega1
    phi_req = _wrap_angle(-np.pi - np.angle(res * fixed(jw)))
    if abs(phi_req) >= np.pi / 2 - 1e-9:
        raise SynthesisError(f"required lead-lag phase {np.degrees(phi_req):.1f} deg "
                             "needs multiple compensation stages")
    alpha = (1.0 + np.sin(phi_req)) / (1.0 - np.sin(phi_req))
    T2 = 1.0 / (Omega1 * np.sqrt(alpha))
    T1 = alpha * T2

    K = pss_controller(PssDesign(k_pss=structure.k_pss, T1=T1, T2=T2, Omega1=Omega1,
                                 lp_corner_mult=structure.lp_corner_mult,
                                 washout_corner_mult=structure.washout_corner_mult))
    err = abs(_wrap_angle(np.angle(res * K(jw)) + np.pi))
    if err > 1e-6:
        raise SynthesisError(f"phase condition missed by {err:.2e} rad")
    return float(T1), float(T2)


# ---------------------------------------------------------------------------
# root locus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootLocus:
    gains: np.ndarray
    pole_sets: tuple  # one sorted-but-continuity-matched array per gain

    def track(self, seed):
        """Follow the pole starting nearest ``seed`` through the gain sweep."""
        out = []
        current = complex(seed)
        for lams in self.pole_sets:
            current = lams[int(np.argmin(np.abs(lams - current)))]
            out.append(current)
        return np.asarray(out)


def root_locus(plant, K_shape, gains, in_idx=0, out_idx=0):
    """Closed-loop eigenvalues for K = g * K_shape at each gain.

    Consecutive gain steps are matched by minimal total displacement so each
    column of the result is a continuous branch. Instability is data here,
    not an error.
    """
    gains = np.asarray(gains, dtype=float)
    if np.any(gains < 0) or np.any(np.diff(gains) < 0):
        raise ValueError("gains must be nonnegative and ascending")
    from .lti import ss_from_tf
    from scipy.optimize import linear_sum_assignment

    k_ss = ss_from_tf(K_shape)
    sets = []
    prev = None
    for g in gains:
        kg = StateSpace(k_ss.A, k_ss.B, g * k_ss.C, g * k_ss.D)
        lams = np.linalg.eigvals(closed_loop_matrix(plant, kg, in_idx, out_idx))
        if prev is None:
            order = np.lexsort((lams.imag, lams.real))
            lams = lams[order]
        else:
            cost = np.abs(prev[:, None] - lams[None, :])
            _, cols = linear_sum_assignment(cost)
            lams = lams[cols]
        sets.append(lams)
        prev = lams
    return RootLocus(gains=gains, pole_sets=tuple(sets))


# ---------------------------------------------------------------------------
# extended plants
# ---------------------------------------------------------------------------

def diag_ss(parts):
    """Block-diagonal combination of SISO systems (None means unity)."""
    sys_parts = []
    for p in parts:
        if p is None:
            sys_parts.append(StateSpace(np.zeros((0, 0)), np.zeros((0, 1)),
                                        np.zeros((1, 0)), [[1.0]]))
        else:
            sys_parts.append(p)
    n = sum(p.n_states for p in sys_parts)
    m = len(sys_parts)
    A = np.zeros((n, n))
    B = np.zeros((n, m))
    C = np.zeros((m, n))
    D = np.zeros((m, m))
    off = 0
    for i, p in enumerate(sys_parts):
        k = p.n_states
        A[off:off + k, off:off + k] = p.A
        B[off:off + k, i] = p.B.ravel()
        C[i, off:off + k] = p.C.ravel()
        D[i, i] = p.D[0, 0]
        off += k
    return StateSpace(A, B, C, D)


def prefilter_channels(K, filters):
    """Cascade per-input-channel SISO prefilters in front of a controller.

    filters: one RationalTF or None (unity) per controller input. Used to
    deploy designs whose synthesis plant embedded a measurement wash-out.
    """
    from .lti import ss_from_tf
    if len(filters) != K.n_inputs:
        raise DimensionError("one prefilter entry per controller input required")
    pre = diag_ss([None if f is None else ss_from_tf(f) for f in filters])
    return series_ss(pre, K)


def series_ss(first, second):
    """Cascade: output of ``first`` feeds input of ``second`` (SISO chains)."""
    if first.n_outputs != second.n_inputs:
        raise DimensionError("cascade dimension mismatch")
    n1, n2 = first.n_states, second.n_states
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = first.A
    A[n1:, n1:] = second.A
    A[n1:, :n1] = second.B @ first.C
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpace(A, B, C, D, first.input_labels, second.output_labels)


@dataclass(frozen=True)
class IntegralWeight:
    """Bi-proper output weight (s + corner)/(s + pole_shift_epsilon)."""

    corner: float
    pole_shift_epsilon: float

    def __post_init__(self):
        if self.pole_shift_epsilon <= 0:
            raise SynthesisError("integral weight pole shift must be positive")

    def tf(self):
        return RationalTF([self.corner, 1.0], [self.pole_shift_epsilon, 1.0])


@dataclass(frozen=True)
class ExtendedPlantSpec:
    """Weighted two-port assembly around a plant for H2 design.

    plant outputs/inputs are addressed by index: d_indices (disturbances,
    become w channels scaled by Wd), u_index (control), z_index (performance),
    y_index (one measurement row or a tuple of rows for complementary
    wide-area channels). One noise channel per measurement (weights Wn) is
    appended to w. Optional integral weight (on z), wash-out precancel and a
    Pade-approximated communication delay, both per measurement channel.
    """

    plant: StateSpace
    d_indices: tuple
    u_index: int
    z_index: int
    y_index: object            # int or tuple of ints
    Wd: tuple
    Wn: object                 # float or tuple, one per measurement
    Wu: float
    Wz: float
    integral_weight: IntegralWeight | None = None
    washout_precancel: object = None   # corner rad/s, or tuple (None allowed per channel)
    y_delay_pade: object = None        # (delay, order), or tuple of those/None

    def y_rows(self):
        return (self.y_index,) if np.isscalar(self.y_index) else tuple(self.y_index)

    def _per_channel(self, value):
        ny = len(self.y_rows())
        if value is None:
            return (None,) * ny
        if isinstance(value, tuple) and value and isinstance(value[0], (tuple, type(None))):
            if len(value) != ny:
                raise SynthesisError("per-channel option length mismatch")
            return value
        if isinstance(value, tuple) and not np.isscalar(self.y_index):
            if len(value) != ny:
                raise SynthesisError("per-channel option length mismatch")
            return value
        return (value,) * ny

    def noise_weights(self):
        ny = len(self.y_rows())
        if np.isscalar(self.Wn):
            return (float(self.Wn),) * ny
        if len(self.Wn) != ny:
            raise SynthesisError("one Wn entry per measurement required")
        return tuple(float(w) for w in self.Wn)

    def washouts(self):
        return self._per_channel(self.washout_precancel)

    def delays(self):
        return self._per_channel(self.y_delay_pade)

    def __post_init__(self):
        if len(self.Wd) != len(self.d_indices):
            raise SynthesisError("one Wd entry per disturbance channel required")
        if any(w < 0 for w in self.Wd) or self.Wu < 0 or self.Wz < 0:
            raise SynthesisError("weights must be nonnegative")
        if any(w <= 0 for w in self.noise_weights()) or self.Wu == 0:
            raise SynthesisError("Wn and Wu must be positive for full-rank direct terms")


def _pbh_ok(A, M, side, tol=1e-7):
    """PBH test: every eigenvalue with Re >= 0 is controllable/observable."""
    lams = np.linalg.eigvals(A)
    n = A.shape[0]
    for lam in lams:
        if lam.real < -tol * max(1.0, abs(lam)):
            continue
        if side == "ctrb":
            mat = np.hstack([lam * np.eye(n) - A, M])
        else:
            mat = np.vstack([lam * np.eye(n) - A, M])
        if np.linalg.matrix_rank(mat, tol=1e-9 * max(1.0, np.linalg.norm(A))) < n:
            return False, lam
    return True, None


def _weight_chain(spec, base_z_ss):
    """Apply the optional integral weight to the z channel; returns SISO ss."""
    if spec.integral_weight is None:
        return base_z_ss
    from .lti import ss_from_tf
    w_ss = ss_from_tf(spec.integral_weight.tf())
    return series_ss(base_z_ss, w_ss)


def build_extended_plant(spec):
    """Standard two-port plant for the feedback-control H2 problem.

    Inputs [w = (Wd-scaled d..., n per measurement), u]; outputs
    [e = (Wz * Wint * z, Wu * u), y...] where each measurement channel is
    (optional wash-out)(optional Pade delay)(plant row) + Wn * its noise.
    Labels carry the partition: inputs 'w:...' then 'u', outputs 'e:...' then
    'y...'.

    Raises SynthesisError when the (A, Bu)/(A, Cy) pair fails stabilizability
    or detectability on unstable modes, or when the w -> e feedthrough is
    nonzero (H2 requires zero direct transmission on the performance channel).
    """
    from .lti import ss_from_tf

    g = spec.plant
    nd = len(spec.d_indices)
    y_rows = spec.y_rows()
    ny = len(y_rows)
    wns = spec.noise_weights()

    chains = []
    for wo, dl in zip(spec.washouts(), spec.delays()):
        ch = StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[1.0]])
        if dl is not None:
            ch = series_ss(ch, ss_from_tf(pade_delay(*dl)))
        if wo is not None:
            ch = series_ss(ch, ss_from_tf(RationalTF([0.0, 1.0], [wo, 1.0])))
        chains.append(ch)

    z_chain = StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[1.0]])
    z_chain = _weight_chain(spec, z_chain)

    n = g.n_states
    offs = [n]
    for ch in chains:
        offs.append(offs[-1] + ch.n_states)
    z_off = offs[-1]
    N = z_off + z_chain.n_states

    cz = g.C[spec.z_index:spec.z_index + 1, :]
    dz = g.D[spec.z_index:spec.z_index + 1, :]
    cys = [g.C[r:r + 1, :] for r in y_rows]
    dys = [g.D[r:r + 1, :] for r in y_rows]

    A = np.zeros((N, N))
    A[:n, :n] = g.A
    for i, ch in enumerate(chains):
        A[offs[i]:offs[i + 1], :n] = ch.B @ cys[i]
        A[offs[i]:offs[i + 1], offs[i]:offs[i + 1]] = ch.A
    A[z_off:, :n] = z_chain.B @ cz
    A[z_off:, z_off:] = z_chain.A

    m_w = nd + ny
    B = np.zeros((N, m_w + 1))
    cols = list(zip(spec.d_indices, spec.Wd)) + [(spec.u_index, 1.0)]
    slots = list(range(nd)) + [m_w]
    for slot, (idx, wd) in zip(slots, cols):
        B[:n, slot] = wd * g.B[:, idx]
        for i, ch in enumerate(chains):
            B[offs[i]:offs[i + 1], slot] = wd * (ch.B @ dys[i][:, idx:idx + 1]).ravel()
        B[z_off:, slot] = wd * (z_chain.B @ dz[:, idx:idx + 1]).ravel()

    C = np.zeros((2 + ny, N))
    C[0, :n] = spec.Wz * (z_chain.D @ cz).ravel()
    C[0, z_off:] = spec.Wz * z_chain.C.ravel()
    for i, ch in enumerate(chains):
        C[2 + i, :n] = (ch.D @ cys[i]).ravel()
        C[2 + i, offs[i]:offs[i + 1]] = ch.C.ravel()

    D = np.zeros((2 + ny, m_w + 1))
    for slot, (idx, wd) in zip(slots, cols):
        D[0, slot] = spec.Wz * wd * (z_chain.D @ dz[:, idx:idx + 1]).item()
        for i, ch in enumerate(chains):
            D[2 + i, slot] = wd * (ch.D @ dys[i][:, idx:idx + 1]).item()
    D[1, m_w] = spec.Wu
    for i in range(ny):
        D[2 + i, nd + i] = wns[i]  # each noise channel feeds its measurement

    if np.any(D[0:2, :m_w] != 0.0):
        raise SynthesisError("w -> e feedthrough is nonzero; H2 requires a strictly "
                             "proper disturbance-to-performance path")

    in_labels = ([f"w:d{i}" for i in range(nd)] + [f"w:n{i}" for i in range(ny)]
                 + ["u"])
    out_labels = ["e:z", "e:u"] + [f"y{i}" for i in range(ny)]
    ext = StateSpace(A, B, C, D, in_labels, out_labels)

    ok, lam = _pbh_ok(ext.A, ext.B[:, m_w:], "ctrb")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not stabilizable from u")
    ok, lam = _pbh_ok(ext.A, ext.C[2:, :], "obsv")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not detectable from y")
    return ext


def build_estimation_plant(spec):
    """Two-port plant for the H2 filter problem: the 'control' input is the
    estimate zhat, entering only the error channel e = Wint(z - zhat).

    The measurement chain (wash-out precancel) is applied to y, and modes the
    wash-out cancels exactly (plant integrator) are removed structurally so
    the Riccati solvers see no marginal hidden modes.

    With u = -K y convention the deployed filter is F = -(K) composed with the
    measurement chain; ``h2_synthesize`` callers use ``filter_from_result``.
    """
    if spec.integral_weight is None:
        raise SynthesisError("estimation plant requires an integral weight "
                             "(bi-proper error weight supplies the D12 rank)")
    g = spec.plant
    nd = len(spec.d_indices)
    y_row = spec.y_rows()[0]
    washout = spec.washouts()[0]

    from .lti import ss_from_tf
    y_chain = StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[1.0]])
    if washout is not None:
        wo = RationalTF([0.0, 1.0], [washout, 1.0])
        y_chain = series_ss(y_chain, ss_from_tf(wo))
    w_int = ss_from_tf(spec.integral_weight.tf())

    cz = g.C[spec.z_index:spec.z_index + 1, :]
    cy = g.C[y_row:y_row + 1, :]
    dz = g.D[spec.z_index:spec.z_index + 1, :]
    dy = g.D[y_row:y_row + 1, :]
    if np.any(dz[:, list(spec.d_indices)] != 0.0):
        raise SynthesisError("direct d -> z term unsupported in the filter problem")

    n, nyc, ni = g.n_states, y_chain.n_states, w_int.n_states
    N = n + nyc + ni
    A = np.zeros((N, N))
    A[:n, :n] = g.A
    A[n:n + nyc, :n] = y_chain.B @ cy
    A[n:n + nyc, n:n + nyc] = y_chain.A
    A[n + nyc:, :n] = w_int.B @ cz
    A[n + nyc:, n + nyc:] = w_int.A

    m_w = nd + 1
    B = np.zeros((N, m_w + 1))
    for k, (idx, wd) in enumerate(zip(spec.d_indices, spec.Wd)):
        B[:n, k] = wd * g.B[:, idx]
        B[n:n + nyc, k] = wd * (y_chain.B @ dy[:, idx:idx + 1]).ravel()
    B[n + nyc:, m_w] = -w_int.B.ravel()  # zhat enters the error integrator

    C = np.zeros((3, N))
    C[0, :n] = spec.Wz * (w_int.D @ cz).ravel()
    C[0, n + nyc:] = spec.Wz * w_int.C.ravel()
    C[2, :n] = (y_chain.D @ cy).ravel()
    C[2, n:n + nyc] = y_chain.C.ravel()

    D = np.zeros((3, m_w + 1))
    D[0, m_w] = -spec.Wz * w_int.D.item()
    D[1, m_w] = spec.Wu
    D[2, nd] = spec.Wn
    for k, (idx, wd) in enumerate(zip(spec.d_indices, spec.Wd)):
        D[2, k] = wd * (y_chain.D @ dy[:, idx:idx + 1]).item()

    in_labels = [f"w:d{i}" for i in range(nd)] + ["w:n", "u"]
    out_labels = ["e:z", "e:u", "y"]
    ext = StateSpace(A, B, C, D, in_labels, out_labels)
    ext = remove_unobservable(ext)

    ok, lam = _pbh_ok(ext.A, ext.B[:, m_w:], "ctrb")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not stabilizable from the estimate input")
    ok, lam = _pbh_ok(ext.A, ext.C[2:, :], "obsv")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not detectable from y")
    return ext


# ---------------------------------------------------------------------------
# H2 synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class H2Result:
    controller: StateSpace
    closed_loop_norm: float
    care_residual: float
    fare_residual: float
    control_term: float  # trace(B1' X B1)
    filter_term: float   # trace(F Y F' R)
    state_feedback: np.ndarray
    observer_gain: np.ndarray


def _partition(ext):
    try:
        n_w = len([l for l in ext.input_labels if l.startswith("w:")])
        u_cols = [i for i, l in enumerate(ext.input_labels) if not l.startswith("w:")]
        e_rows = [i for i, l in enumerate(ext.output_labels) if l.startswith("e:")]
        y_rows = [i for i, l in enumerate(ext.output_labels) if not l.startswith("e:")]
    except AttributeError as exc:
        raise SynthesisError("extended plant must carry w:/u and e:/y labels") from exc
    if len(u_cols) != 1 or not y_rows or n_w == 0 or not e_rows:
        raise SynthesisError("expected one control input and labeled w/e/y channels")
    return n_w, u_cols[0], e_rows, y_rows


def h2_synthesize(ext):
    """Observer-plus-state-feedback H2-optimal controller.

    Standard assumptions are diagnosed by name: zero w->e feedthrough, full
    column rank D12, full row rank D21, stabilizable/detectable pairs. The
    returned closed-loop norm is cross-checked against the assembled closed
    loop, and the separation decomposition terms are reported.
    """
    n_w, u_col, e_rows, y_rows = _partition(ext)
    A = ext.A
    n = A.shape[0]
    B1 = ext.B[:, :n_w]
    B2 = ext.B[:, u_col:u_col + 1]
    C1 = ext.C[e_rows, :]
    C2 = ext.C[y_rows, :]
    D11 = ext.D[e_rows, :n_w]
    D12 = ext.D[e_rows, u_col:u_col + 1]
    D21 = ext.D[y_rows, :n_w]

    if np.any(D11 != 0.0):
        raise SynthesisError("nonzero w -> e feedthrough (D11 != 0)")
    R = D12.T @ D12
    if np.linalg.matrix_rank(R) < 1 or R[0, 0] <= 0:
        raise SynthesisError("D12 must have full column rank (penalize u directly)")
    V = D21 @ D21.T
    if np.linalg.matrix_rank(V) < len(y_rows):
        raise SynthesisError("D21 must have full row rank (include measurement noise)")

    ok, lam = _pbh_ok(A, B2, "ctrb")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not stabilizable from u")
    ok, lam = _pbh_ok(A, C2, "obsv")
    if not ok:
        raise SynthesisError(f"unstable mode {lam} not detectable from y")

    Q = C1.T @ C1
    S = C1.T @ D12
    try:
        X = scipy.linalg.solve_continuous_are(A, B2, Q, R, s=S)
    except Exception as exc:
        raise SynthesisError(f"control Riccati failed: {exc} "
                             "(check for imaginary-axis invariant zeros)") from exc
    F = -np.linalg.solve(R, B2.T @ X + S.T)

    W = B1 @ B1.T
    Sf = B1 @ D21.T
    try:
        Y = scipy.linalg.solve_continuous_are(A.T, C2.T, W, V, s=Sf)
    except Exception as exc:
        raise SynthesisError(f"filter Riccati failed: {exc} "
                             "(check for imaginary-axis invariant zeros)") from exc
    L = -(Y @ C2.T + Sf) @ np.linalg.inv(V)

    care_res = np.linalg.norm(
        A.T @ X + X @ A + Q - (X @ B2 + S) @ np.linalg.solve(R, (X @ B2 + S).T), "fro")
    care_res /= 1.0 + np.linalg.norm(X, "fro")
    fare_res = np.linalg.norm(
        A @ Y + Y @ A.T + W - (Y @ C2.T + Sf) @ np.linalg.solve(V, (Y @ C2.T + Sf).T), "fro")
    fare_res /= 1.0 + np.linalg.norm(Y, "fro")

    # controller: xk' = (A + B2 F + L C2) xk - L y, u = F xk = -K y
    Ak = A + B2 @ F + L @ C2
    K = StateSpace(Ak, L, F, np.zeros((1, len(y_rows))),
                   input_labels=tuple(f"y{i}" for i in range(len(y_rows))),
                   output_labels=("u",))

    A_cl = np.block([[A, -B2 @ F], [L @ C2, Ak]])
    B_cl = np.vstack([B1, L @ D21])
    C_cl = np.hstack([C1, -D12 @ F])
    cl = StateSpace(A_cl, B_cl, C_cl)
    lams = np.linalg.eigvals(A_cl)
    if np.max(lams.real) >= 0.0:
        raise SynthesisError("closed loop not internally stable; assumptions violated")
    norm = h2_norm(cl)

    control_term = float(np.trace(B1.T @ X @ B1))
    filter_term = float(np.trace(F @ Y @ F.T @ R))
    return H2Result(controller=K, closed_loop_norm=norm,
                    care_residual=float(care_res), fare_residual=float(fare_res),
                    control_term=control_term, filter_term=filter_term,
                    state_feedback=F, observer_gain=L)


def filter_from_result(result, spec):
    """Deployed estimator zhat = F y for an estimation-plant synthesis.

    F = -(K) cascaded with the wash-out precancel (the synthesis saw the
    washed-out measurement).
    """
    K = result.controller
    F_core = StateSpace(K.A, K.B, -K.C, -K.D)
    washout = spec.washouts()[0]
    if washout is not None:
        from .lti import ss_from_tf
        wo = ss_from_tf(RationalTF([0.0, 1.0], [washout, 1.0]))
        return series_ss(wo, F_core)
    return F_core


# ---------------------------------------------------------------------------
# balanced truncation
# ---------------------------------------------------------------------------

def _balanced_truncation_stable(sys, target):
    Wc = scipy.linalg.solve_continuous_lyapunov(sys.A, -sys.B @ sys.B.T)
    Wo = scipy.linalg.solve_continuous_lyapunov(sys.A.T, -sys.C.T @ sys.C)
    Wc = 0.5 * (Wc + Wc.T)
    Wo = 0.5 * (Wo + Wo.T)
    # square-root balancing
    lc = scipy.linalg.cholesky(Wc + 1e-14 * np.eye(sys.n_states) * max(1.0, np.trace(Wc)),
                               lower=True)
    lo = scipy.linalg.cholesky(Wo + 1e-14 * np.eye(sys.n_states) * max(1.0, np.trace(Wo)),
                               lower=True)
    U, sig, Vt = np.linalg.svd(lo.T @ lc)
    sig = np.maximum(sig, 1e-300)
    k = int(target)
    T = lc @ Vt.T[:, :k] @ np.diag(sig[:k] ** -0.5)
    Ti = np.diag(sig[:k] ** -0.5) @ U[:, :k].T @ lo.T
    return StateSpace(Ti @ sys.A @ T, Ti @ sys.B, sys.C @ T, sys.D,
                      sys.input_labels, sys.output_labels)


def reduce_order(K, target_order):
    """Balanced truncation of a controller to ``target_order`` states.

    Stable systems are truncated directly; otherwise the antistable part is
    split off via an ordered Schur form, preserved exactly, and only the
    stable part is truncated. target >= current order is a no-op.
    """
    if target_order >= K.n_states:
        return K
    lam = poles(K)
    if lam.size == 0 or np.max(lam.real) < 0.0:
        return _balanced_truncation_stable(K, target_order)

    # stable/antistable split
    T, Z, sdim = scipy.linalg.schur(K.A, output="real", sort="lhp")
    n_stable = sdim
    n_anti = K.n_states - n_stable
    if target_order < n_anti:
        raise SynthesisError("target order smaller than the antistable part")
    # decouple the blocks: solve T11 X - X T22 = -T12
    T11 = T[:n_stable, :n_stable]
    T12 = T[:n_stable, n_stable:]
    T22 = T[n_stable:, n_stable:]
    Xc = scipy.linalg.solve_sylvester(T11, -T22, -T12)
    W = np.eye(K.n_states)
    W[:n_stable, n_stable:] = Xc
    Winv = np.eye(K.n_states)
    Winv[:n_stable, n_stable:] = -Xc
    Zt = Z @ W
    Zti = Winv @ Z.T
    Bq = Zti @ K.B
    Cq = K.C @ Zt
    stable_part = StateSpace(T11, Bq[:n_stable], Cq[:, :n_stable], np.zeros_like(K.D))
    anti_part = StateSpace(T22, Bq[n_stable:], Cq[:, n_stable:], K.D)
    red = _balanced_truncation_stable(stable_part, target_order - n_anti)
    nr = red.n_states
    A = np.zeros((nr + n_anti, nr + n_anti))
    A[:nr, :nr] = red.A
    A[nr:, nr:] = anti_part.A
    B = np.vstack([red.B, anti_part.B])
    C = np.hstack([red.C, anti_part.C])
    return StateSpace(A, B, C, K.D, K.input_labels, K.output_labels)


def max_grid_error(sys1, sys2, grid=None):
    """Max magnitude deviation |G1(jw) - G2(jw)| over a standard grid."""
    if grid is None:
        grid = FrequencyGrid.log_spaced(1e-2, 1e3, 400)
    w = grid.omegas
    r1 = np.array([sys1.evalfr(1j * wi)[0, 0] for wi in w])
    r2 = np.array([sys2.evalfr(1j * wi)[0, 0] for wi in w])
    return float(np.max(np.abs(r1 - r2)))


# ---------------------------------------------------------------------------
# delay modeling
# ---------------------------------------------------------------------------

def pade_delay(T, order):
    """Pade approximant of exp(-sT); all-pass with matched low-frequency phase."""
    if T < 0:
        raise ValueError("delay must be nonnegative")
    if order not in (1, 2, 3):
        raise ValueError("supported Pade orders: 1, 2, 3")
    if T == 0.0:
        return RationalTF([1.0], [1.0])
    n = order
    den = np.zeros(n + 1)
    num = np.zeros(n + 1)
    for k in range(n + 1):
        c = (math.factorial(n) * math.factorial(2 * n - k)
             / (math.factorial(2 * n) * math.factorial(k) * math.factorial(n - k)))
        den[k] = c * T ** k
        num[k] = c * (-T) ** k
    return RationalTF(num, den)
