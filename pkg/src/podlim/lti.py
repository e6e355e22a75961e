"""Core LTI machinery: polynomials, rational transfer functions, state-space models.

Conventions used throughout the package:

* Polynomial coefficients are stored in ascending powers of s.
* Negative feedback everywhere: a controller K acts as u = -K y, so the loop
  with plant G has sensitivity S = 1/(1 + G K) and ``feedback(G, K)`` returns
  G/(1 + G K).
* Sequence-valued spectral results (poles, zeros) are sorted by
  (real part, imaginary part) so results are deterministic.
* Root finding goes through companion-matrix eigenvalues, both for polynomial
  roots and for transfer-function zeros extracted from state-space pencils.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp
import scipy.linalg

__all__ = [
    "Polynomial",
    "RationalTF",
    "rtf",
    "StateSpace",
    "FrequencyGrid",
    "DimensionError",
    "SingularityError",
    "UnstableSystemError",
    "NonzeroFeedthroughError",
    "COPRIME_RTOL",
    "poles",
    "zeros",
    "ss_to_tf",
    "ss_from_tf",
    "freq_response",
    "feedback",
    "h2_norm",
    "series",
    "parallel",
    "closed_loop_matrix",
    "remove_unobservable",
]

# Relative tolerance for merging numerically coincident pole/zero pairs.
COPRIME_RTOL = 1e-7

_TRIM_RTOL = 1e-12


class DimensionError(ValueError):
    """Matrix or index dimensions are inconsistent."""


class SingularityError(ValueError):
    """Evaluation requested at an imaginary-axis pole."""

    def __init__(self, omega, message=None):
        self.omega = omega
        super().__init__(message or f"grid point omega={omega} collides with an imaginary-axis pole")


class UnstableSystemError(ValueError):
    """Operation requires a Hurwitz A matrix."""


class NonzeroFeedthroughError(ValueError):
    """Operation requires zero feedthrough (D = 0)."""


def _sort_complex(vals):
    vals = np.asarray(vals, dtype=complex)
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


class Polynomial:
    """Real polynomial with ascending coefficients; trailing zeros trimmed."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        scale = np.max(np.abs(c))
        tol = _TRIM_RTOL * scale
        n = c.size
        while n > 1 and abs(c[n - 1]) <= tol:
            n -= 1
        self.coeffs = c[:n]
        self.coeffs.flags.writeable = False

    @property
    def degree(self):
        return self.coeffs.size - 1

    def is_zero(self):
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    def __call__(self, s):
        return npp.polyval(s, self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(npp.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial([float(other)])
        return Polynomial(npp.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial([float(other)])
        return Polynomial(npp.polysub(self.coeffs, other.coeffs))

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def roots(self):
        """All roots with multiplicity, via the companion matrix, sorted."""
        if self.is_zero():
            raise ValueError("the zero polynomial has no well-defined roots")
        if self.degree == 0:
            return np.array([], dtype=complex)
        return _sort_complex(npp.polyroots(self.coeffs))

    @staticmethod
    def from_roots(roots, leading=1.0):
        """Real polynomial with the given (conjugate-symmetric) root multiset."""
        roots = np.asarray(roots, dtype=complex)
        if roots.size == 0:
            return Polynomial([float(leading)])
        c = npp.polyfromroots(roots) * leading
        return Polynomial(c.real)

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"

    def to_json(self):
        return self.coeffs.tolist()


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    return Polynomial(x)


def _rel_remainder(coeffs, divisor):
    q, rem = npp.polydiv(coeffs, divisor)
    scale = np.max(np.abs(coeffs)) or 1.0
    return q, float(np.max(np.abs(rem)) / scale)


def _deflate_matched(num, den, pairs):
    """Divide matched (num_root, den_root) factors out of both polynomials.

    A cancelled root can be a multiple root on one side (where the computed
    location is only sqrt(eps)-accurate), so each factor is built from three
    candidates (num root, den root, midpoint) and the one leaving the smallest
    division remainders on both sides wins. Complex roots are consumed
    together with their conjugate-partner pair as a real quadratic.
    """
    nc = num.coeffs.copy()
    dc = den.coeffs.copy()
    remaining = sorted(pairs, key=lambda p: (p[0].real, abs(p[0].imag), p[0].imag))
    while remaining:
        rn, rd = remaining.pop(0)
        if abs(rn.imag) > 1e-12 * max(1.0, abs(rn)):
            k = min(range(len(remaining)),
                    key=lambda i: abs(remaining[i][0] - np.conj(rn)), default=None)
            if k is None or abs(remaining[k][0] - np.conj(rn)) > 1e-6 * max(1.0, abs(rn)):
                raise ArithmeticError("complex cancelled root without conjugate partner")
            remaining.pop(k)
            candidates = [np.array([abs(r) ** 2, -2.0 * r.real, 1.0])
                          for r in (rn, rd, 0.5 * (rn + rd))]
        else:
            candidates = [np.array([-r.real, 1.0]) for r in (rn, rd, 0.5 * (rn + rd))]
        best = None
        for div in candidates:
            qn, en = _rel_remainder(nc, div)
            qd, ed = _rel_remainder(dc, div)
            score = max(en, ed)
            if best is None or score < best[0]:
                best = (score, qn, qd)
        nc, dc = best[1], best[2]
    return Polynomial(nc), Polynomial(dc)


class RationalTF:
    """Scalar rational transfer function num(s)/den(s).

    Raw construction need not be coprime; ``simplify()`` cancels common roots
    (relative distance below ``COPRIME_RTOL``) and normalizes the denominator
    to be monic.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = _as_poly(num)
        self.den = _as_poly(den)
        if self.den.is_zero():
            raise ValueError("denominator must not be identically zero")

    def __repr__(self):
        return f"RationalTF({self.num.coeffs.tolist()}, {self.den.coeffs.tolist()})"

    # -- structure queries ------------------------------------------------

    def is_proper(self):
        return self.num.degree <= self.den.degree or self.num.is_zero()

    def is_strictly_proper(self):
        return self.num.degree < self.den.degree or self.num.is_zero()

    def is_zero(self):
        return self.num.is_zero()

    def gain_at_infinity(self):
        """lim_{s->inf} value: 0 for strictly proper, ratio of leading coeffs else."""
        if self.is_zero() or self.is_strictly_proper():
            return 0.0
        if self.num.degree > self.den.degree:
            raise ValueError("improper transfer function has no finite value at infinity")
        return self.num.coeffs[-1] / self.den.coeffs[-1]

    def dc_gain(self):
        if self.den.coeffs[0] == 0.0:
            return np.inf if self.num.coeffs[0] != 0.0 else np.nan
        return self.num.coeffs[0] / self.den.coeffs[0]

    # -- evaluation --------------------------------------------------------

    def __call__(self, s):
        return self.num(s) / self.den(s)

    # -- arithmetic (results simplified) ------------------------------------

    def __mul__(self, other):
        if isinstance(other, RationalTF):
            return RationalTF(self.num * other.num, self.den * other.den).simplify()
        return RationalTF(self.num * float(other), self.den).simplify()

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, RationalTF):
            other = RationalTF([float(other)], [1.0])
        num = self.num * other.den + other.num * self.den
        return RationalTF(num, self.den * other.den).simplify()

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if not isinstance(other, RationalTF):
            other = RationalTF([float(other)], [1.0])
        num = self.num * other.den - other.num * self.den
        return RationalTF(num, self.den * other.den).simplify()

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return RationalTF(-self.num, self.den)

    def __truediv__(self, other):
        if isinstance(other, RationalTF):
            return RationalTF(self.num * other.den, self.den * other.num).simplify()
        return RationalTF(self.num, self.den * float(other)).simplify()

    def __rtruediv__(self, other):
        return RationalTF(self.den * float(other), self.num).simplify()

    def inverse(self):
        if self.is_zero():
            raise ValueError("cannot invert the zero transfer function")
        return RationalTF(self.den, self.num)

    # -- normal form ---------------------------------------------------------

    def simplify(self, rtol=COPRIME_RTOL):
        """Coprime form: common num/den roots within tolerance cancelled.

        Idempotent; afterwards the denominator is monic. When nothing cancels
        the original coefficients are kept (only rescaled), so repeated
        arithmetic does not erode precision; cancellations remove the matched
        factors by polynomial deflation.
        """
        if self.num.is_zero():
            return RationalTF([0.0], [1.0])
        num_roots = sorted(self.num.roots(), key=lambda r: (r.real, r.imag))
        den_roots = list(self.den.roots())

        matched = []
        for r in num_roots:
            best = None
            best_dist = np.inf
            for i, p in enumerate(den_roots):
                d = abs(r - p)
                if d < best_dist:
                    best, best_dist = i, d
            if best is not None and best_dist < rtol * max(1.0, abs(r)):
                matched.append((r, den_roots.pop(best)))

        # keep only conjugate-consistent matches so deflation stays real
        consistent = []
        used = [False] * len(matched)
        for i, (rn, rd) in enumerate(matched):
            if used[i]:
                continue
            if abs(rn.imag) <= 1e-12 * max(1.0, abs(rn)):
                consistent.append((rn, rd))
                used[i] = True
                continue
            partner = None
            for k in range(len(matched)):
                if (k != i and not used[k]
                        and abs(matched[k][0] - np.conj(rn)) < 1e-6 * max(1.0, abs(rn))):
                    partner = k
                    break
            used[i] = True
            if partner is None:
                continue
            used[partner] = True
            consistent.append((rn, rd))
            consistent.append(matched[partner])

        den_lead = self.den.coeffs[-1]
        if not consistent:
            return RationalTF(self.num.coeffs / den_lead, self.den.coeffs / den_lead)
        num, den = _deflate_matched(self.num, self.den, consistent)
        lead = den.coeffs[-1]
        return RationalTF(num.coeffs / lead, den.coeffs / lead)

    def poles(self):
        """Roots of the denominator after coprime simplification."""
        tf = self.simplify()
        return tf.den.roots()

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(d):
        return RationalTF(d["num"], d["den"])


def rtf(num, den=(1.0,)):
    """Shorthand constructor, ascending coefficients."""
    return RationalTF(num, den)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies (rad/s)."""

    omegas: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        if w.size == 0:
            raise ValueError("frequency grid must be nonempty")
        if not np.all(np.isfinite(w)):
            raise ValueError("frequency grid must be finite")
        if not np.all(w > 0.0):
            raise ValueError("frequencies must be positive")
        if not np.all(np.diff(w) > 0.0):
            raise ValueError("frequencies must be strictly increasing")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "omegas", w)

    def __len__(self):
        return self.omegas.size

    @staticmethod
    def log_spaced(lo, hi, n):
        return FrequencyGrid(np.logspace(np.log10(lo), np.log10(hi), int(n)))

    @staticmethod
    def standard():
        """200-point log grid over [1e-2, 1e2] rad/s."""
        return FrequencyGrid.log_spaced(1e-2, 1e2, 200)


class StateSpace:
    """Real matrix quadruple (A, B, C, D) with input/output labels."""

    __slots__ = ("A", "B", "C", "D", "input_labels", "output_labels")

    def __init__(self, A, B, C, D=None, input_labels=None, output_labels=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.asarray(B, dtype=float)
        C = np.asarray(C, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionError(f"C has {C.shape[1]} columns, expected {n}")
        m, p = B.shape[1], C.shape[0]
        if D is None:
            D = np.zeros((p, m))
        D = np.atleast_2d(np.asarray(D, dtype=float))
        if D.shape != (p, m):
            raise DimensionError(f"D must be {p}x{m}, got {D.shape}")
        if input_labels is None:
            input_labels = tuple(f"u{i+1}" for i in range(m))
        if output_labels is None:
            output_labels = tuple(f"y{i+1}" for i in range(p))
        input_labels = tuple(str(s) for s in input_labels)
        output_labels = tuple(str(s) for s in output_labels)
        if len(input_labels) != m:
            raise DimensionError("input label count does not match B columns")
        if len(output_labels) != p:
            raise DimensionError("output label count does not match C rows")
        for M in (A, B, C, D):
            M.flags.writeable = False
        self.A, self.B, self.C, self.D = A, B, C, D
        self.input_labels = input_labels
        self.output_labels = output_labels

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_outputs(self):
        return self.C.shape[0]

    def input_index(self, label):
        return self.input_labels.index(label)

    def output_index(self, label):
        return self.output_labels.index(label)

    def __repr__(self):
        return (f"StateSpace(n={self.n_states}, inputs={list(self.input_labels)}, "
                f"outputs={list(self.output_labels)})")

    def evalfr(self, s):
        """Full p x m response matrix at a single complex point."""
        n = self.n_states
        if n == 0:
            return self.D.astype(complex)
        M = s * np.eye(n) - self.A
        return self.C @ np.linalg.solve(M, self.B) + self.D

    def to_json(self):
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "input_labels": list(self.input_labels),
            "output_labels": list(self.output_labels),
        }

    @staticmethod
    def from_json(d):
        return StateSpace(np.array(d["A"], dtype=float).reshape(len(d["A"]), -1) if d["A"] else np.zeros((0, 0)),
                          np.array(d["B"], dtype=float).reshape(len(d["A"]), -1),
                          np.array(d["C"], dtype=float).reshape(-1, len(d["A"])) if d["A"] else np.zeros((len(d["C"]), 0)),
                          np.array(d["D"], dtype=float),
                          d.get("input_labels"), d.get("output_labels"))


# ---------------------------------------------------------------------------
# spectral operations
# ---------------------------------------------------------------------------

def poles(sys):
    """Eigenvalues of A with multiplicity, sorted by (real, imag)."""
    if isinstance(sys, RationalTF):
        return sys.poles()
    A = sys.A
    if A.shape[0] != A.shape[1]:
        raise DimensionError("A must be square")
    if A.shape[0] == 0:
        return np.array([], dtype=complex)
    try:
        vals = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue iteration failed: {exc}") from exc
    return _sort_complex(vals)


def zeros(tf):
    """Roots of the numerator after coprime simplification."""
    if tf.num.is_zero():
        raise ValueError("zero numerator: the zero transfer function has no zeros")
    return tf.simplify().num.roots()


def _tf_probe_point(pole_vals, zero_vals):
    rho = 1.0
    for v in (pole_vals, zero_vals):
        if len(v):
            rho = max(rho, float(np.max(np.abs(v))))
    s0 = 1.370731 * rho + 0.5
    all_roots = np.concatenate([pole_vals, zero_vals]) if len(zero_vals) else pole_vals
    for _ in range(50):
        if len(all_roots) == 0 or np.min(np.abs(all_roots - s0)) > 1e-6 * max(1.0, s0):
            return s0
        s0 *= 1.618
    return s0


def ss_to_tf(sys, in_idx, out_idx):
    """SISO channel C_row (sI - A)^{-1} B_col + D entry as a coprime RationalTF.

    Poles come from eig(A); zeros from the generalized eigenvalues of the
    Rosenbrock pencil, which keeps the pole/zero locations accurate for the
    small dense models used here. The gain is fitted at a probe point off the
    spectrum.
    """
    m, p = sys.n_inputs, sys.n_outputs
    if not (0 <= in_idx < m) or not (0 <= out_idx < p):
        raise IndexError(f"channel ({in_idx}, {out_idx}) out of range for {m} inputs, {p} outputs")
    n = sys.n_states
    b = sys.B[:, in_idx:in_idx + 1]
    c = sys.C[out_idx:out_idx + 1, :]
    d = float(sys.D[out_idx, in_idx])

    if n == 0:
        return RationalTF([d], [1.0])

    pole_vals = poles(sys)

    # zero channel: C row or B column identically zero and no feedthrough
    if d == 0.0 and (not np.any(b) or not np.any(c)):
        return RationalTF([0.0], [1.0])

    # Rosenbrock pencil  [sI-A, -B; C, D] : finite generalized eigenvalues of
    # (F, E) with F = [[A, B], [-C, -D]], E = diag(I, 0) are the roots of
    # den(s) * G(s).
    F = np.block([[sys.A, b], [-c, -np.array([[d]])]])
    E = np.zeros((n + 1, n + 1))
    E[:n, :n] = np.eye(n)
    alpha, beta = scipy.linalg.eig(F, E, right=False, homogeneous_eigvals=True)
    alpha = np.asarray(alpha).ravel()
    beta = np.asarray(beta).ravel()
    scale = np.max(np.abs(np.concatenate([alpha, beta]))) or 1.0
    finite = np.abs(beta) > 1e-9 * scale
    zero_vals = alpha[finite] / beta[finite]
    zero_vals = zero_vals[np.isfinite(zero_vals)]
    zero_vals = _sort_complex(zero_vals)

    s0 = _tf_probe_point(pole_vals, zero_vals)
    g0 = (c @ np.linalg.solve(s0 * np.eye(n) - sys.A, b)).item() + d
    if abs(g0) < 1e-13 * max(1.0, np.max(np.abs(sys.C)) * np.max(np.abs(sys.B))):
        # second probe to confirm a structurally zero channel
        s1 = s0 * 2.7183 + 1.0
        g1 = (c @ np.linalg.solve(s1 * np.eye(n) - sys.A, b)).item() + d
        if abs(g1) < 1e-13 * max(1.0, np.max(np.abs(sys.C)) * np.max(np.abs(sys.B))):
            return RationalTF([0.0], [1.0])

    k = g0 * np.prod(s0 - pole_vals) / np.prod(s0 - zero_vals)
    if abs(k.imag) > 1e-6 * abs(k):
        raise ArithmeticError("gain fit produced a non-real leading coefficient")
    num = Polynomial.from_roots(zero_vals, leading=k.real)
    den = Polynomial.from_roots(pole_vals, leading=1.0)
    return RationalTF(num, den).simplify()


def ss_from_tf(tf):
    """Controllable-canonical realization of a proper RationalTF."""
    tf = tf.simplify()
    if not tf.is_proper():
        raise ValueError("only proper transfer functions have a state-space realization")
    den = tf.den.coeffs / tf.den.coeffs[-1]
    num = tf.num.coeffs / tf.den.coeffs[-1]
    n = den.size - 1
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                          [[float(num[0])]])
    d = 0.0
    num_sp = np.zeros(n)
    if num.size == n + 1:
        d = num[-1]
        num_sp[:] = num[:-1] - d * den[:-1]
    else:
        num_sp[:num.size] = num
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = num_sp.reshape(1, -1)
    return StateSpace(A, B, C, [[d]])


# ---------------------------------------------------------------------------
# frequency response
# ---------------------------------------------------------------------------

def _check_imag_axis_collisions(pole_vals, omegas, tol=1e-9):
    axis = pole_vals[np.abs(pole_vals.real) <= tol]
    for lam in axis:
        hits = np.abs(omegas - abs(lam.imag)) < tol
        if np.any(hits):
            raise SingularityError(float(omegas[hits][0]))


def freq_response(sys, grid):
    """Complex value at each j*omega of the grid.

    Accepts a RationalTF or a SISO StateSpace. Grid points colliding with an
    imaginary-axis pole (within 1e-9) raise SingularityError naming the
    offending frequency.
    """
    w = grid.omegas if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    jw = 1j * w
    if isinstance(sys, RationalTF):
        simp = sys.simplify()
        if not simp.is_zero():
            _check_imag_axis_collisions(simp.den.roots(), w)
        return simp.num(jw) / simp.den(jw)
    if sys.n_inputs != 1 or sys.n_outputs != 1:
        raise DimensionError("freq_response on StateSpace requires a SISO system; "
                             "select a channel with ss_to_tf first")
    _check_imag_axis_collisions(poles(sys), w)
    n = sys.n_states
    out = np.empty(w.size, dtype=complex)
    I = np.eye(n)
    for i, s in enumerate(jw):
        out[i] = (sys.C @ np.linalg.solve(s * I - sys.A, sys.B)).item() + float(sys.D[0, 0])
    return out


# ---------------------------------------------------------------------------
# interconnections
# ---------------------------------------------------------------------------

def feedback(G, K):
    """Closed loop G/(1 + G K) in coprime form (negative feedback u = -K y)."""
    char_num = G.den * K.den + G.num * K.num
    if Polynomial(char_num.coeffs).is_zero():
        raise ValueError("algebraic loop: 1 + G K is identically zero")
    return RationalTF(G.num * K.den, char_num).simplify()


def series(G1, G2):
    """Coprime product G1 * G2."""
    return (G1 * G2).simplify()


def parallel(G1, G2):
    """Coprime sum G1 + G2."""
    return (G1 + G2).simplify()


def closed_loop_matrix(plant, K, in_idx=0, out_idx=0):
    """A matrix of the loop  u[in_idx] = -K y[out_idx]  around ``plant``.

    ``out_idx`` may be a sequence of output rows for a controller with several
    measurement inputs. Feedthrough on both sides is handled as long as the
    loop is well posed (I + D_K D_plant invertible on the closed channels).
    """
    rows = [out_idx] if np.isscalar(out_idx) else list(out_idx)
    Ap = plant.A
    bp = plant.B[:, in_idx:in_idx + 1]
    cp = plant.C[rows, :]
    dp = plant.D[rows, in_idx:in_idx + 1]
    Ak, Bk, Ck = K.A, K.B, K.C
    Dk = K.D

    gamma = 1.0 + (Dk @ dp).item()
    if abs(gamma) < 1e-12:
        raise ValueError("algebraic loop: interconnection not well posed")
    # u = -(Ck xk + Dk y), y = cp x + dp u  =>  u = (-Ck xk - Dk cp x)/gamma
    n, nk = Ap.shape[0], Ak.shape[0]
    ux = -(Dk @ cp) / gamma
    uk = -Ck / gamma if nk else np.zeros((1, 0))
    A_cl = np.zeros((n + nk, n + nk))
    A_cl[:n, :n] = Ap + bp @ ux
    A_cl[:n, n:] = bp @ uk
    if nk:
        y_x = cp + dp @ ux
        y_k = dp @ uk
        A_cl[n:, :n] = Bk @ y_x
        A_cl[n:, n:] = Ak + Bk @ y_k
    return A_cl


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def h2_norm(sys):
    """H2 norm sqrt(trace(C P C^T)) with A P + P A^T + B B^T = 0.

    Requires A Hurwitz and D = 0.
    """
    lam = poles(sys)
    if lam.size and np.max(lam.real) >= 0.0:
        worst = lam[np.argmax(lam.real)]
        raise UnstableSystemError(f"A is not Hurwitz (eigenvalue at {worst})")
    if np.any(sys.D != 0.0):
        raise NonzeroFeedthroughError("nonzero D gives an infinite H2 norm")
    if sys.n_states == 0:
        return 0.0
    P = scipy.linalg.solve_continuous_lyapunov(sys.A, -sys.B @ sys.B.T)
    P = 0.5 * (P + P.T)
    val = float(np.trace(sys.C @ P @ sys.C.T))
    return float(np.sqrt(max(val, 0.0)))


# ---------------------------------------------------------------------------
# structural reductions
# ---------------------------------------------------------------------------

def remove_unobservable(sys, rtol=1e-9):
    """Project away the unobservable subspace (all outputs jointly).

    The unobservable subspace is A-invariant and inside ker(C), so the
    projected realization reproduces every input-output map exactly. Used to
    drop modes cancelled by design (e.g. a wash-out precancel of a plant
    integrator) before Riccati-based synthesis.
    """
    n = sys.n_states
    if n == 0:
        return sys
    blocks = [sys.C]
    M = sys.C
    for _ in range(n - 1):
        M = M @ sys.A
        blocks.append(M)
    obs = np.vstack(blocks)
    u, sv, vt = np.linalg.svd(obs)
    rank = int(np.sum(sv > rtol * (sv[0] if sv.size else 0.0)))
    if rank == n:
        return sys
    Q = vt[:rank, :].T  # orthonormal basis of the observable subspace
    A = Q.T @ sys.A @ Q
    B = Q.T @ sys.B
    C = sys.C @ Q
    return StateSpace(A, B, C, sys.D, sys.input_labels, sys.output_labels)
