"""Analytic two-machine benchmark: state space and closed-form transfer functions.

Two synchronous machines (scaled inertias M1, M2, dampings D1, D2) connected
through effective reactances X1*, X2* to a common control bus where an active
power P_u is injected and the voltage phase angle theta is measured. The bus
angle is algebraic:

    theta = (X2* delta1 + X1* delta2 + X1* X2* P_u) / Xsig*,   Xsig* = X1* + X2*

so theta appears as a model output with feedthrough from P_u only, and the
realization stays minimal with states (delta1, delta2, omega1, omega2).

The undamped symmetric closed forms (performance_tfs) are the ground truth the
generic state-space numerics are validated against. Note on signs: with the
bus closer to machine 1 (X1* < X2*), a positive injection accelerates machine
1 harder than machine 2, so the relative-speed channel is

    Gzu = (X2* - X1*)/(M Xsig*) * s/(s^2 + Omega^2),

consistent with the transfer-function matrix and the state-space model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import Polynomial, RationalTF, StateSpace

__all__ = [
    "TwoMachineParams",
    "ParameterError",
    "UnsupportedConfigurationError",
    "OrderingError",
    "build_state_space",
    "interarea_frequency",
    "performance_tfs",
    "zero_frequencies",
]


class ParameterError(ValueError):
    """Physical parameter violates its admissible range."""


class UnsupportedConfigurationError(ValueError):
    """Closed form requested outside its regime (damped/asymmetric)."""


class OrderingError(ValueError):
    """Machine labelling violates the assumed X1* < X2* ordering."""


@dataclass(frozen=True)
class TwoMachineParams:
    """Physical parameters, pu units.

    M1, M2   scaled inertia (pu s^2/rad), > 0
    D1, D2   damping (pu/(rad/s)), >= 0
    X1star   effective (cosine-scaled) reactance machine 1 to control bus (pu), > 0
    X2star   same for machine 2, > 0
    omega_override  optional explicit inter-area frequency (rad/s)
    """

    M1: float
    M2: float
    D1: float
    D2: float
    X1star: float
    X2star: float
    omega_override: float | None = None

    def __post_init__(self):
        if self.M1 <= 0 or self.M2 <= 0:
            raise ParameterError("inertias M1, M2 must be positive")
        if self.D1 < 0 or self.D2 < 0:
            raise ParameterError("dampings D1, D2 must be nonnegative")
        if self.X1star <= 0 or self.X2star <= 0:
            raise ParameterError("reactances X1star, X2star must be positive")

    @property
    def x_sigma(self):
        return self.X1star + self.X2star

    def is_symmetric(self, rtol=1e-12):
        return abs(self.M1 - self.M2) <= rtol * max(self.M1, self.M2)

    def is_undamped(self):
        return self.D1 == 0.0 and self.D2 == 0.0

    def to_json(self):
        return {"M1": self.M1, "M2": self.M2, "D1": self.D1, "D2": self.D2,
                "X1": self.X1star, "X2": self.X2star}

    @staticmethod
    def from_json(d):
        return TwoMachineParams(M1=d["M1"], M2=d["M2"], D1=d["D1"], D2=d["D2"],
                                X1star=d["X1"], X2star=d["X2"])


def build_state_space(p, include_theta_dot=False, include_relative_speed=False):
    """4-state realization with states (delta1, delta2, omega1, omega2).

    Inputs (dP1, dP2, Pu); outputs (delta1, delta2, omega1, omega2, theta).
    The theta row carries the algebraic bus-angle relation, so the only
    nonzero feedthrough is D[theta, Pu] = X1* X2* / Xsig*.

    Optional labeled outputs:
      include_theta_dot      'theta_dot' = (X2* omega1 + X1* omega2)/Xsig*.
                             This is the exact derivative of theta's state
                             part; the algebraic P_u feedthrough derivative is
                             deliberately omitted (it would require dPu/dt).
      include_relative_speed 'z' = omega1 - omega2.
    """
    xs = p.x_sigma
    x1, x2 = p.X1star, p.X2star
    A = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0 / (p.M1 * xs), 1.0 / (p.M1 * xs), -p.D1 / p.M1, 0.0],
        [1.0 / (p.M2 * xs), -1.0 / (p.M2 * xs), 0.0, -p.D2 / p.M2],
    ])
    B = np.array([
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [1.0 / p.M1, 0.0, x2 / (p.M1 * xs)],
        [0.0, 1.0 / p.M2, x1 / (p.M2 * xs)],
    ])
    C = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [x2 / xs, x1 / xs, 0.0, 0.0],
    ]
    D = [
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, x1 * x2 / xs],
    ]
    out_labels = ["delta1", "delta2", "omega1", "omega2", "theta"]
    if include_theta_dot:
        C.append([0.0, 0.0, x2 / xs, x1 / xs])
        D.append([0.0, 0.0, 0.0])
        out_labels.append("theta_dot")
    if include_relative_speed:
        C.append([0.0, 0.0, 1.0, -1.0])
        D.append([0.0, 0.0, 0.0])
        out_labels.append("z")
    return StateSpace(A, B, np.array(C), np.array(D),
                      input_labels=("dP1", "dP2", "Pu"),
                      output_labels=out_labels)


def interarea_frequency(p):
    """Undamped inter-area frequency Omega = sqrt(2/(M Xsig*)), M = M1 = M2.

    The closed form assumes identical inertias and neglects damping; damping
    shifts the mode off the imaginary axis but the formula is still returned
    for D > 0 (documented approximation).
    """
    if p.omega_override is not None:
        return float(p.omega_override)
    if not p.is_symmetric():
        raise UnsupportedConfigurationError(
            "interarea_frequency closed form assumes M1 == M2; "
            f"got M1={p.M1}, M2={p.M2}")
    return float(np.sqrt(2.0 / (p.M1 * p.x_sigma)))


def performance_tfs(p):
    """Exact rational channels for the undamped symmetric configuration.

    Returns {Gzd1, Gzd2, Gzu, Gyd1, Gyd2, Gyu} with z = omega1 - omega2 and
    y = theta:

        G0   = 1/(s^2 M (s^2 + Omega^2))
        Gzd1 = G0 s^3 = -Gzd2
        Gyd1 = G0 N1,  N1 = (X2*/Xsig*)(s^2 + 1/(M X2*))
        Gyd2 = G0 N2,  N2 = (X1*/Xsig*)(s^2 + 1/(M X1*))
        Gyu  = G0 N3,  N3 = M Xsig* N1 N2
        Gzu  = (X2* - X1*)/(M Xsig*) * s/(s^2 + Omega^2)

    Damped or asymmetric parameters are refused: the closed forms are derived
    undamped, and silently mixing regimes would corrupt oracle tests. Use the
    state-space path for those.
    """
    if not p.is_undamped() or not p.is_symmetric():
        raise UnsupportedConfigurationError(
            "closed-form channels require D1 = D2 = 0 and M1 = M2; "
            "use build_state_space + ss_to_tf instead")
    M = p.M1
    xs = p.x_sigma
    x1, x2 = p.X1star, p.X2star
    omega2 = 2.0 / (M * xs)

    # den(G0) = M s^2 (s^2 + Omega^2), ascending
    g0_den = Polynomial([0.0, 0.0, M * omega2, 0.0, M])
    s3 = Polynomial([0.0, 0.0, 0.0, 1.0])
    n1 = Polynomial([x2 / (xs * M * x2), 0.0, x2 / xs])   # (X2/Xs)(s^2 + 1/(M X2))
    n2 = Polynomial([x1 / (xs * M * x1), 0.0, x1 / xs])
    n3 = (n1 * n2) * (M * xs)

    gzd1 = RationalTF(s3, g0_den).simplify()
    tfs = {
        "Gzd1": gzd1,
        "Gzd2": RationalTF(-s3, g0_den).simplify(),
        "Gyd1": RationalTF(n1, g0_den).simplify(),
        "Gyd2": RationalTF(n2, g0_den).simplify(),
        "Gyu": RationalTF(n3, g0_den).simplify(),
        "Gzu": RationalTF(Polynomial([0.0, (x2 - x1) / (M * xs)]),
                          Polynomial([omega2, 0.0, 1.0])),
    }
    return tfs


def zero_frequencies(p):
    """Magnitudes (|q1|, |q2|) of the local-measurement zero pairs.

    q1 = sqrt(1/(M X2*)) belongs to Gyd1, q2 = sqrt(1/(M X1*)) to Gyd2.
    Requires X1* < X2* (machine 1 nearer the control bus); the interlacing
    Omega/sqrt(2) <= |q1| < |q2| then holds automatically.
    """
    if p.X1star >= p.X2star:
        raise OrderingError(
            "zero_frequencies assumes X1star < X2star (machine 1 nearest the "
            "control bus); relabel the machines to satisfy the ordering")
    if not p.is_symmetric():
        raise UnsupportedConfigurationError("zero_frequencies requires M1 == M2")
    M = p.M1
    q1 = float(np.sqrt(1.0 / (M * p.X2star)))
    q2 = float(np.sqrt(1.0 / (M * p.X1star)))
    omega = interarea_frequency(p)
    assert omega / np.sqrt(2.0) <= q1 * (1 + 1e-12) and q1 < q2
    return q1, q2
