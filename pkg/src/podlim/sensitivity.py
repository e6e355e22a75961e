"""Sensitivity functions, filtering sensitivities, and water-bed integrals.

Quantities handled here, all for the negative-feedback convention u = -K y:

    S = 1/(1 + Gyu K)         sensitivity            T = 1 - S
    P = (Gzd - F Gyd)/Gzd     filtering sensitivity  M = 1 - P = F Gyd / Gzd
    Tzd = Gzd - Gzu K (1 + Gyu K)^{-1} Gyd           closed-loop disturbance map
    R = Tzd / Gzd             disturbance response ratio

plus numerical certification of the interpolation constraints at open-RHP
poles/zeros and of the log-magnitude ("water-bed") integrals that link
attenuation in one band to amplification elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import FrequencyGrid, Polynomial, RationalTF, feedback, freq_response

__all__ = [
    "SensitivityPair",
    "FilteringPair",
    "IntegralReport",
    "ConstraintRecord",
    "ConstraintReport",
    "sensitivity_pair",
    "closed_loop_tzd",
    "filtering_pair",
    "disturbance_response_ratio",
    "decouple_input",
    "assemble_estimation_feedback",
    "bode_log_integral",
    "interpolation_check",
    "attenuation_band",
    "filtering_curve",
    "response_ratio_curve",
]

_IDENTITY_TOL = 1e-10


def _identity_grid():
    return FrequencyGrid.log_spaced(1e-3, 1e3, 100)


def _check_unity_sum(a, b, tol=_IDENTITY_TOL, what="S+T"):
    grid = _identity_grid()
    try:
        resp = freq_response(a, grid) + freq_response(b, grid)
    except ValueError:
        # imaginary-axis pole on the default grid: nudge the grid
        grid = FrequencyGrid(grid.omegas * (1.0 + 3.7e-7))
        resp = freq_response(a, grid) + freq_response(b, grid)
    err = np.max(np.abs(resp - 1.0))
    if err > tol:
        raise ArithmeticError(f"{what} = 1 identity violated by {err:.3e}")


def _is_stable(tf):
    p = tf.poles()
    return p.size == 0 or float(np.max(p.real)) < 0.0


@dataclass(frozen=True)
class SensitivityPair:
    """S and T = 1 - S of a feedback loop; S + T = 1 is verified on a grid."""

    S: RationalTF
    T: RationalTF
    closed_loop_stable: bool

    def __post_init__(self):
        _check_unity_sum(self.S, self.T, what="S+T")


@dataclass(frozen=True)
class FilteringPair:
    """Filtering sensitivity P and complement M for one disturbance channel."""

    P: RationalTF
    M: RationalTF
    disturbance_label: str

    def __post_init__(self):
        _check_unity_sum(self.P, self.M, what="P+M")


def sensitivity_pair(Gyu, K):
    """S = 1/(1 + Gyu K) and T = 1 - S, both coprime.

    Closed-loop stability is reported (SensitivityPair.closed_loop_stable),
    not required.
    """
    char = Gyu.den * K.den + Gyu.num * K.num
    if char.is_zero():
        raise ValueError("algebraic loop: 1 + Gyu K is identically zero")
    S = RationalTF(Gyu.den * K.den, char).simplify()
    T = RationalTF(Gyu.num * K.num, char).simplify()
    return SensitivityPair(S=S, T=T, closed_loop_stable=_is_stable(S))


def closed_loop_tzd(Gzd, Gzu, Gyd, Gyu, K):
    """Tzd = Gzd - Gzu K (1 + Gyu K)^{-1} Gyd, coprime.

    The result is verified against direct complex arithmetic on a grid; when
    y = z (Gyd = Gzd, Gyu = Gzu) it collapses to S * Gzd.
    """
    SK = feedback(K, Gyu)          # K/(1 + Gyu K)
    tzd = (Gzd - Gzu * SK * Gyd).simplify()

    grid = FrequencyGrid.log_spaced(1.1e-2, 0.9e2, 50)
    gk = freq_response(K, grid)
    direct = (freq_response(Gzd, grid)
              - freq_response(Gzu, grid) * gk / (1.0 + freq_response(Gyu, grid) * gk)
              * freq_response(Gyd, grid))
    got = freq_response(tzd, grid)
    scale = max(1.0, float(np.max(np.abs(direct))))
    err = float(np.max(np.abs(got - direct))) / scale
    if err > 1e-8:
        raise ArithmeticError(f"closed-loop algebra drifted from grid evaluation by {err:.3e}")
    return tzd


def filtering_pair(Gzd, Gyd, F, label="d"):
    """P = (Gzd - F Gyd) Gzd^{-1} and M = F Gyd Gzd^{-1} for a stable filter F."""
    if Gzd.is_zero():
        raise ValueError("Gzd must be right invertible (nonzero numerator)")
    if not _is_stable(F):
        raise ValueError("F must be a stable filter (all poles in the open left half-plane)")
    M = (F * Gyd * Gzd.inverse()).simplify()
    P = (1.0 - M).simplify()
    return FilteringPair(P=P, M=M, disturbance_label=label)


def disturbance_response_ratio(Gzd, Gzu, Gyd, Gyu, K, label="d"):
    """R = 1 - Gzu K (1 + Gyu K)^{-1} Gyd Gzd^{-1}; equals Tzd/Gzd.

    |R(jw)| < 1 is disturbance attenuation at that frequency.
    """
    if Gzd.is_zero():
        raise ValueError("Gzd must be right invertible (nonzero numerator)")
    SK = feedback(K, Gyu)
    R = (1.0 - Gzu * SK * Gyd * Gzd.inverse()).simplify()

    tzd = closed_loop_tzd(Gzd, Gzu, Gyd, Gyu, K)
    grid = FrequencyGrid.log_spaced(1.07e-2, 0.93e2, 50)
    lhs = freq_response(R, grid)
    rhs = freq_response(tzd, grid) / freq_response(Gzd, grid)
    if np.max(np.abs(lhs - rhs)) > 1e-10 * max(1.0, float(np.max(np.abs(rhs)))):
        raise ArithmeticError("R != Tzd/Gzd on the verification grid")
    return R


def decouple_input(F, Gzu, Gyu):
    """Fu = Gzu/F - Gyu, so that Gzu = F (Gyu + Fu) holds exactly.

    Properness of the result is up to the plant/filter combination; query
    Fu.is_proper() on the returned value.
    """
    if F.is_zero():
        raise ValueError("F must not be identically zero")
    return (Gzu * F.inverse() - Gyu).simplify()


def assemble_estimation_feedback(F, Fu, Kz):
    """Fold the estimator F and decoupler Fu into a single controller.

    K = Kz F (1 + Kz F Fu)^{-1}: with u = -K y this reproduces the two-block
    estimate-then-control architecture u = -Kz zhat, zhat = F(y + Fu u).
    """
    kzf = (F * float(Kz)).simplify()
    inner = (1.0 + kzf * Fu).simplify()
    if inner.is_zero():
        raise ValueError("inner algebraic loop: 1 + Kz F Fu is identically zero")
    K = (kzf * inner.inverse()).simplify()
    return K


# ---------------------------------------------------------------------------
# water-bed integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralReport:
    """Numerically certified log-magnitude integral of a sensitivity function.

    value                    quadrature over [omega_min, omega_max] including
                             analytic handling of imaginary-axis zeros and the
                             below-grid head estimate (rad/s)
    tail_estimate            analytic tail beyond omega_max assuming ~c/w^2
    rhp_zero_sum             pi * sum of real parts of open-RHP zeros of the
                             argument (the pole/zero sum appearing on the
                             right-hand side of the integral identities)
    rhp_pole_sum             pi * sum of real parts of open-RHP poles of the
                             argument (nonzero means the function itself is
                             unstable and the integral is formal only)
    excluded_zero_sum        pi * sum of real parts of caller-supplied RHP
                             zeros subtracted on the right-hand side
    relative_degree_limit_term  (pi/2) lim s [f(s) - f(inf)]/f(inf)
    """

    value: float
    omega_max: float
    tail_estimate: float
    rhp_pole_sum: float
    rhp_zero_sum: float
    excluded_zero_sum: float
    relative_degree_limit_term: float
    warnings: tuple = ()

    @property
    def total(self):
        return self.value + self.tail_estimate

    @property
    def rhs(self):
        """Right-hand side of the applicable integral identity."""
        return self.relative_degree_limit_term + self.rhp_zero_sum - self.excluded_zero_sum

    def to_json(self):
        return {
            "value": self.value,
            "omega_max": self.omega_max,
            "tail_estimate": self.tail_estimate,
            "total": self.total,
            "rhp_pole_sum": self.rhp_pole_sum,
            "rhp_zero_sum": self.rhp_zero_sum,
            "excluded_zero_sum": self.excluded_zero_sum,
            "relative_degree_limit_term": self.relative_degree_limit_term,
            "rhs": self.rhs,
            "warnings": list(self.warnings),
        }


def _limit_term(num, den):
    """(pi/2) * lim s[f(s) - f(inf)]/f(inf) for deg num == deg den.

    Equals (pi/2)(a_{k-1}/a_k - b_{k-1}/b_k) = (pi/2)(sum poles - sum zeros).
    """
    a = num.coeffs
    b = den.coeffs
    k = den.degree
    a_top = a[k] if num.degree == k else 0.0
    a_next = a[k - 1] if k >= 1 and num.degree >= k - 1 else 0.0
    b_next = b[k - 1] if k >= 1 else 0.0
    if a_top == 0.0:
        raise ValueError("argument is strictly proper: f(inf) = 0, integral not normalizable")
    return 0.5 * np.pi * (a_next / a_top - b_next / b[k])


def _tail_constant_symbolic(num, den):
    """Coefficient C in ln|f(jw)/f(inf)| ~ C/w^2 from the 1/s expansion."""
    a = num.coeffs
    b = den.coeffs
    k = den.degree

    def coef(c, deg, i):
        j = deg - i
        return c[j] if 0 <= j <= deg and j < c.size else 0.0

    a_top = coef(a, k, 0) if num.degree == k else 0.0
    if a_top == 0.0:
        return None
    al1 = coef(a, k, 1) / a_top
    al2 = coef(a, k, 2) / a_top
    be1 = coef(b, k, 1) / b[k]
    be2 = coef(b, k, 2) / b[k]
    u1 = al1 - be1
    u2 = al2 - be2 - be1 * u1
    return 0.5 * u1 * u1 - u2


def _log_abs_linear_integral(a, b, c):
    """Closed form of the integral of ln|w - c| over [a, b]."""
    def F(x):
        t = x - c
        return t * np.log(abs(t)) - x if t != 0.0 else -x
    return F(b) - F(a)


def bode_log_integral(tf, omega_max=1e3, n_points=2000, normalize_at_infinity=True,
                      rhp_zeros_excluded=(), omega_min=1e-4):
    """Integral of ln|f(jw)/f(inf)| dw over (0, inf), numerically certified.

    Composite trapezoid in ln(w) on a log grid over [omega_min, omega_max].
    Imaginary-axis zeros of f produce integrable log singularities; their
    ln|w - w0| parts are split off and integrated in closed form, and the
    remaining smooth part is evaluated through the deflated numerator so no
    catastrophic cancellation occurs near the notches. The below-grid head is
    estimated from a local a + b*ln(w) fit, the tail beyond omega_max from a
    c/w^2 fit over the last decade (cross-checked against the symbolic
    expansion; disagreement beyond 5% is reported as a warning).

    rhp_zeros_excluded: locations whose pi*sum is reported separately on the
    right-hand side (the Gzd-zero term of the filtering identity).
    """
    f = tf.simplify()
    if f.is_zero():
        raise ValueError("cannot integrate the log magnitude of the zero function")
    if not f.is_proper():
        raise ValueError("argument must be proper")

    num, den = f.num, f.den
    if normalize_at_infinity:
        f_ref = f.gain_at_infinity()
        if f_ref == 0.0:
            raise ValueError("f(inf) = 0: normalized integrand is not defined "
                             "(argument strictly proper)")
    else:
        f_ref = 1.0

    num_roots = num.roots() if num.degree > 0 else np.array([], dtype=complex)
    den_roots = den.roots() if den.degree > 0 else np.array([], dtype=complex)

    axis_tol = 1e-9
    bad_poles = den_roots[np.abs(den_roots.real) <= axis_tol * np.maximum(1.0, np.abs(den_roots))]
    if bad_poles.size:
        raise ValueError(f"argument has imaginary-axis poles at {bad_poles}; integral diverges")

    warnings = []

    # split imaginary-axis zeros: s = 0 roots give a smooth ln(w) term on the
    # grid, conjugate pairs give ln|w - w0| singularities handled analytically
    on_axis = np.abs(num_roots.real) <= axis_tol * np.maximum(1.0, np.abs(num_roots))
    axis_roots = num_roots[on_axis]
    smooth_roots = num_roots[~on_axis]
    at_origin = np.abs(axis_roots) <= axis_tol
    m_origin = int(np.sum(at_origin))
    axis_freqs = sorted(r.imag for r in axis_roots[~at_origin] if r.imag > 0.0)

    lead = num.coeffs[-1]
    num_defl = Polynomial.from_roots(smooth_roots, leading=lead)

    # cluster the axis zeros into (frequency, multiplicity) groups
    groups = []
    for w0 in axis_freqs:
        for g in groups:
            if abs(g[0] - w0) <= 1e-9 * max(1.0, w0):
                g[1] += 1
                break
        else:
            groups.append([w0, 1])

    w = np.logspace(np.log10(omega_min), np.log10(omega_max), int(n_points))
    for w0, _ in groups:
        w = w[np.abs(w - w0) > 1e-6 * max(1.0, w0)]  # skip near-singular points
    jw = 1j * w

    # stably evaluated integrand: singular factors appear as explicit logs
    H = (np.log(np.abs(num_defl(jw))) - np.log(np.abs(den(jw))) - np.log(abs(f_ref)))
    if m_origin:
        H = H + m_origin * np.log(w)
    for w0, m in groups:
        H = H + m * (np.log(np.abs(w - w0)) + np.log(w + w0))

    if not np.all(np.isfinite(H)):
        raise ArithmeticError("NaN/inf in integrand; argument may have axis poles or zeros "
                              "coinciding with the grid")

    quad = float(np.trapezoid(H * w, np.log(w)))

    # local analytic treatment of each log singularity: replace the trapezoid
    # mass of a small window around w0 with closed-form ln|w - w0| plus a
    # trapezoid of the remaining smooth part
    for w0, m in groups:
        if w0 > omega_max:
            warnings.append(f"imaginary-axis zero at {w0:.4g} rad/s beyond omega_max; "
                            "tail model unreliable")
            continue
        if w0 < omega_min:
            continue
        k0 = int(np.searchsorted(w, w0))
        lo = max(k0 - 4, 0)
        hi = min(k0 + 4, w.size - 1)
        seg = slice(lo, hi + 1)
        raw = np.trapezoid(H[seg] * w[seg], np.log(w[seg]))
        reg = H[seg] - m * np.log(np.abs(w[seg] - w0))
        corr = (m * _log_abs_linear_integral(w[lo], w[hi], w0)
                + np.trapezoid(reg * w[seg], np.log(w[seg])))
        quad += float(corr - raw)

    def away_from_zeros(mask):
        for w0, _ in groups:
            mask &= np.abs(w - w0) > 0.1 * w0
        return mask

    # head: fit H ~ a + b ln w on the first decade, closed-form down to 0
    head_pts = away_from_zeros(w <= omega_min * 10.0)
    X = np.vstack([np.ones(int(np.sum(head_pts))), np.log(w[head_pts])]).T
    coef, *_ = np.linalg.lstsq(X, H[head_pts], rcond=None)
    a0, b0 = coef
    head = float(a0 * omega_min + b0 * omega_min * (np.log(omega_min) - 1.0))

    # tail: fit H ~ C/w^2 over the last decade
    tail_pts = away_from_zeros(w >= omega_max / 10.0)
    wt = w[tail_pts]
    denom = float(np.sum(wt ** -4))
    c_fit = float(np.sum(H[tail_pts] * wt ** -2) / denom) if denom else 0.0
    tail = c_fit / omega_max

    c_sym = _tail_constant_symbolic(num, den) if normalize_at_infinity else None
    if c_sym is not None and abs(c_sym) > 1e-12:
        if abs(c_fit - c_sym) > 0.05 * abs(c_sym):
            warnings.append(f"tail fit {c_fit:.4g} disagrees with symbolic constant "
                            f"{c_sym:.4g} by more than 5%")

    limit_term = _limit_term(num, den) if normalize_at_infinity else 0.0

    rhp_zeros = num_roots[num_roots.real > axis_tol * np.maximum(1.0, np.abs(num_roots))]
    rhp_poles = den_roots[den_roots.real > axis_tol * np.maximum(1.0, np.abs(den_roots))]
    excl = np.asarray(list(rhp_zeros_excluded), dtype=complex)

    return IntegralReport(
        value=quad + head,
        omega_max=float(omega_max),
        tail_estimate=float(tail),
        rhp_pole_sum=float(np.pi * np.sum(rhp_poles.real)) if rhp_poles.size else 0.0,
        rhp_zero_sum=float(np.pi * np.sum(rhp_zeros.real)) if rhp_zeros.size else 0.0,
        excluded_zero_sum=float(np.pi * np.sum(excl.real)) if excl.size else 0.0,
        relative_degree_limit_term=float(limit_term),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# interpolation constraints
# ---------------------------------------------------------------------------

_EXPECTED = {
    ("S", "pole"): 0.0, ("S", "zero"): 1.0,
    ("T", "pole"): 1.0, ("T", "zero"): 0.0,
    ("P", "pole"): 0.0, ("P", "zero"): 1.0,
    ("M", "pole"): 1.0, ("M", "zero"): 0.0,
}


@dataclass(frozen=True)
class ConstraintRecord:
    location: complex
    kind: str
    function: str
    expected: float
    observed: complex
    passed: bool

    def to_json(self):
        return {"location": [self.location.real, self.location.imag],
                "kind": self.kind, "function": self.function,
                "expected": self.expected,
                "observed": [self.observed.real, self.observed.imag],
                "pass": self.passed}


@dataclass(frozen=True)
class ConstraintReport:
    records: tuple
    tolerance: float

    @property
    def all_pass(self):
        return all(r.passed for r in self.records)

    def to_json(self):
        return {"tolerance": self.tolerance,
                "all_pass": self.all_pass,
                "records": [r.to_json() for r in self.records]}


def interpolation_check(tf, locations, kinds, function="S", tol=1e-6):
    """Evaluate a sensitivity-type function at open-RHP points.

    kinds[i] is 'pole' or 'zero' (meaning: RHP pole/zero of the underlying
    plant for S/T, RHP pole of Gzd / RHP zero of Gyd for P/M); the mandated
    value follows from the function role. Locations on the imaginary axis or
    in the left half-plane are rejected.
    """
    if function not in {"S", "T", "P", "M"}:
        raise ValueError("function must be one of S, T, P, M")
    locations = [complex(s) for s in locations]
    kinds = list(kinds)
    if len(locations) != len(kinds):
        raise ValueError("locations and kinds must have equal length")
    records = []
    for s, kind in zip(locations, kinds):
        if kind not in {"pole", "zero"}:
            raise ValueError(f"kind must be 'pole' or 'zero', got {kind!r}")
        if s.real <= 0.0:
            raise ValueError(f"location {s} is not in the open right half-plane")
        expected = _EXPECTED[(function, kind)]
        observed = complex(tf(s))
        records.append(ConstraintRecord(
            location=s, kind=kind, function=function, expected=expected,
            observed=observed, passed=bool(abs(observed - expected) < tol)))
    return ConstraintReport(records=tuple(records), tolerance=tol)


def filtering_curve(Gzd, Gyd, F, grid):
    """Grid values of (P, M) by direct complex arithmetic.

    Numerically robust companion to filtering_pair for high-order filters,
    where coefficient-space rational arithmetic would lose precision to
    near-coincident mode pairs.
    """
    m = (freq_response(F, grid) * freq_response(Gyd, grid)
         / freq_response(Gzd, grid))
    return 1.0 - m, m


def response_ratio_curve(Gzd, Gzu, Gyd, Gyu, K, grid):
    """Grid values of the disturbance response ratio by direct arithmetic."""
    gk = freq_response(K, grid)
    return 1.0 - (freq_response(Gzu, grid) * gk
                  / (1.0 + freq_response(Gyu, grid) * gk)
                  * freq_response(Gyd, grid) / freq_response(Gzd, grid))


def attenuation_band(curves, grid):
    """Largest contiguous grid interval where every curve has |.(jw)| < 1.

    curves: sequence of (label, RationalTF or precomputed complex/magnitude
    array on the grid). Points with max magnitude exactly 1 count as not
    attenuating (strict inequality). Returns (omega_lo, omega_hi) or None if
    no point attenuates.
    """
    if not curves:
        raise ValueError("need at least one curve")
    w = grid.omegas
    worst = np.full(w.size, -np.inf)
    for _, tf in curves:
        if isinstance(tf, np.ndarray):
            vals = np.abs(tf)
            if vals.size != w.size:
                raise ValueError("curve array length does not match the grid")
        else:
            vals = np.abs(freq_response(tf, grid))
        worst = np.maximum(worst, vals)
    ok = worst < 1.0
    if not np.any(ok):
        return None
    best = (0, -1)  # (length, start)
    start = None
    for i, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[0]:
                best = (i - start, start)
            start = None
    length, start = best
    return float(w[start]), float(w[start + length - 1])
