"""Nonlinear multi-machine grid simulation with classical machines.

Model class: each synchronous machine is a constant EMF magnitude E' behind
its transient reactance X'd, with swing-equation rotor dynamics

    d(delta)/dt = omega
    M d(omega)/dt = P_mech - P_e - D omega          [machine units: MW, rad, s]

The ac network is lossless (pure reactances) and algebraic: bus voltage
magnitudes and angles solve the active/reactive power balance with
constant-power loads at every step (Newton, warm started). Machine EMF
magnitudes are fixed after an initial conventional power-flow solve. An
embedded HVDC link injects +P at its from-bus and -P at its to-bus, hard
saturated at +/- limit around its setpoint.

Angle recording uses the machine-1 rotor frame (theta_bus - delta_1);
controllers see measurement deviations from their equilibrium values, so the
drifting synchronous-frame reference is immaterial.

Separation (loss of synchronism) is data, not an error: any machine-pair
angle beyond pi rad or a mid-step network Newton failure stops the run early
with the trajectory flagged ``separated``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .lti import StateSpace

__all__ = [
    "Bus",
    "Line",
    "Machine",
    "Hvdc",
    "GridModel",
    "Disturbance",
    "MeasurementSpec",
    "ControllerLoop",
    "OperatingPoint",
    "Trajectory",
    "ConfigurationError",
    "NetworkSolveError",
    "kundur_two_area",
    "solve_equilibrium",
    "simulate",
    "linearize",
    "measure_offline",
    "line_flow",
    "total_energy",
]


class ConfigurationError(ValueError):
    """Model data is inconsistent or an operating target is unreachable."""


class NetworkSolveError(RuntimeError):
    """Algebraic network Newton iteration failed to converge."""

    def __init__(self, message, worst_bus=None):
        super().__init__(message)
        self.worst_bus = worst_bus


@dataclass(frozen=True)
class Bus:
    id: int
    load_P: float = 0.0   # MW
    load_Q: float = 0.0   # MVAr


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    X: float               # pu on system base
    R: float = 0.0
    count: int = 1

    def __post_init__(self):
        if self.X <= 0:
            raise ConfigurationError("line reactance must be positive")
        if self.R != 0.0:
            raise ConfigurationError("lossless model: line resistance must be 0")
        if self.count < 1:
            raise ConfigurationError("circuit count must be >= 1")


@dataclass(frozen=True)
class Machine:
    bus: int
    M: float               # MW s^2/rad on system base
    D: float               # MW/(rad/s)
    Xd_prime: float        # pu on system base
    P_mech: float          # MW, scheduled (slack machine's value is solved)
    Vset: float = 1.0      # terminal voltage setpoint for the initial solve

    def __post_init__(self):
        if self.M <= 0 or self.Xd_prime <= 0:
            raise ConfigurationError("machine M and Xd_prime must be positive")
        if self.D < 0:
            raise ConfigurationError("machine damping must be nonnegative")


@dataclass(frozen=True)
class Hvdc:
    from_bus: int
    to_bus: int
    P0: float = 0.0        # MW steady-state setpoint
    limit: float = 75.0    # MW modulation limit (each side of P0)

    def __post_init__(self):
        if self.limit < 0:
            raise ConfigurationError("HVDC limit must be nonnegative")


@dataclass(frozen=True)
class GridModel:
    buses: tuple
    lines: tuple
    machines: tuple
    hvdc: Hvdc | None = None
    system_base: float = 100.0  # MVA
    f_s: float = 60.0           # Hz
    slack_machine: int = 0

    def __post_init__(self):
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate bus ids")
        idset = set(ids)
        for ln in self.lines:
            if ln.from_bus not in idset or ln.to_bus not in idset:
                raise ConfigurationError(f"line {ln} references unknown bus")
        for m in self.machines:
            if m.bus not in idset:
                raise ConfigurationError(f"machine at unknown bus {m.bus}")
        if self.hvdc is not None:
            if self.hvdc.from_bus not in idset or self.hvdc.to_bus not in idset:
                raise ConfigurationError("HVDC endpoints must be existing buses")
        if not self.machines:
            raise ConfigurationError("at least one machine required")
        if not (0 <= self.slack_machine < len(self.machines)):
            raise ConfigurationError("slack machine index out of range")
        # connectivity over lines + machine attachment
        adj = {i: set() for i in idset}
        for ln in self.lines:
            adj[ln.from_bus].add(ln.to_bus)
            adj[ln.to_bus].add(ln.from_bus)
        seen = set()
        stack = [ids[0]]
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            stack.extend(adj[b] - seen)
        if seen != idset:
            raise ConfigurationError("network graph is not connected")

    def bus_index(self, bus_id):
        return self._ids().index(bus_id)

    def _ids(self):
        return sorted(b.id for b in self.buses)

    def to_json(self):
        return {
            "buses": [{"id": b.id, "load_P": b.load_P, "load_Q": b.load_Q}
                      for b in self.buses],
            "lines": [{"from": l.from_bus, "to": l.to_bus, "X": l.X, "R": l.R,
                       "count": l.count} for l in self.lines],
            "machines": [{"bus": m.bus, "M": m.M, "D": m.D, "Xd_prime": m.Xd_prime,
                          "P_mech": m.P_mech, "Vset": m.Vset} for m in self.machines],
            "hvdc": None if self.hvdc is None else
                {"from": self.hvdc.from_bus, "to": self.hvdc.to_bus,
                 "P0": self.hvdc.P0, "limit": self.hvdc.limit},
            "system_base": self.system_base,
            "f_s": self.f_s,
            "slack_machine": self.slack_machine,
        }

    @staticmethod
    def from_json(d):
        return GridModel(
            buses=tuple(Bus(b["id"], b.get("load_P", 0.0), b.get("load_Q", 0.0))
                        for b in d["buses"]),
            lines=tuple(Line(l["from"], l["to"], l["X"], l.get("R", 0.0),
                             l.get("count", 1)) for l in d["lines"]),
            machines=tuple(Machine(m["bus"], m["M"], m["D"], m["Xd_prime"],
                                   m["P_mech"], m.get("Vset", 1.0))
                           for m in d["machines"]),
            hvdc=None if d.get("hvdc") is None else
                Hvdc(d["hvdc"]["from"], d["hvdc"]["to"], d["hvdc"].get("P0", 0.0),
                     d["hvdc"].get("limit", 75.0)),
            system_base=d.get("system_base", 100.0),
            f_s=d.get("f_s", 60.0),
            slack_machine=d.get("slack_machine", 0),
        )

    def hash(self):
        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class Disturbance:
    bus: int
    delta_P: float   # MW, positive = added load
    t_start: float
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigurationError("disturbance duration must be positive")


@dataclass(frozen=True)
class MeasurementSpec:
    """Measurement channel description.

    kind: theta_bus | freq_bus | line_P | bus_Vmag | machine_speed
    location: bus id, machine index, or (from_bus, to_bus) for line_P
    delay: seconds (ring buffer with linear interpolation)
    freq_lp_corner: rad/s corner of the low-pass derivative for freq_bus
    """

    kind: str
    location: object
    delay: float = 0.0
    freq_lp_corner: float = 20.0

    def __post_init__(self):
        if self.kind not in {"theta_bus", "freq_bus", "line_P", "bus_Vmag",
                             "machine_speed"}:
            raise ConfigurationError(f"unknown measurement kind {self.kind!r}")
        if self.delay < 0:
            raise ConfigurationError("delay must be nonnegative")

    def label(self):
        loc = self.location
        if isinstance(loc, (tuple, list)):
            loc = "_".join(str(x) for x in loc)
        return f"{self.kind}_{loc}"


@dataclass(frozen=True)
class ControllerLoop:
    """One feedback loop: u = -K (y - y_eq) summed onto the actuator.

    ``measurement`` is a MeasurementSpec or a tuple of them (one per
    controller input column) for complementary/wide-area configurations.
    """

    controller: StateSpace
    measurement: object
    actuator: str = "hvdc"

    def specs(self):
        if isinstance(self.measurement, MeasurementSpec):
            return (self.measurement,)
        return tuple(self.measurement)


@dataclass(frozen=True)
class OperatingPoint:
    delta0: np.ndarray     # machine rotor angles (rad)
    E: np.ndarray          # machine EMF magnitudes (pu)
    theta0: np.ndarray     # bus angles (rad)
    V0: np.ndarray         # bus voltage magnitudes (pu)
    P_mech: np.ndarray     # MW (solved, includes slack)
    residual: float


@dataclass
class Trajectory:
    time: np.ndarray
    signals: dict
    metadata: dict

    def __post_init__(self):
        n = self.time.size
        for k, v in self.signals.items():
            if len(v) != n:
                raise ValueError(f"signal {k} length {len(v)} != time length {n}")

    @property
    def separated(self):
        return bool(self.metadata.get("separated", False))


# ---------------------------------------------------------------------------
# network machinery
# ---------------------------------------------------------------------------

class _Network:
    """Vectorized lossless network: branches + machine EMF attachments."""

    def __init__(self, model):
        self.model = model
        self.ids = model._ids()
        self.idx = {b: i for i, b in enumerate(self.ids)}
        self.nb = len(self.ids)
        fi, ti, b = [], [], []
        for ln in model.lines:
            for _ in range(ln.count):
                fi.append(self.idx[ln.from_bus])
                ti.append(self.idx[ln.to_bus])
                b.append(1.0 / ln.X)
        self.fi = np.array(fi, dtype=int)
        self.ti = np.array(ti, dtype=int)
        self.b = np.array(b, dtype=float)
        self.mbus = np.array([self.idx[m.bus] for m in model.machines], dtype=int)
        self.mb = np.array([1.0 / m.Xd_prime for m in model.machines], dtype=float)
        base = model.system_base
        loads = {self.idx[bu.id]: (bu.load_P / base, bu.load_Q / base)
                 for bu in model.buses}
        self.loadP = np.zeros(self.nb)
        self.loadQ = np.zeros(self.nb)
        for i, (p, q) in loads.items():
            self.loadP[i] = p
            self.loadQ[i] = q

    def injections(self, delta, E, theta, V):
        """Machine P, Q injected into terminal buses (pu), per machine."""
        d = delta - theta[self.mbus]
        Vt = V[self.mbus]
        Pm = self.mb * E * Vt * np.sin(d)
        Qm = self.mb * (E * Vt * np.cos(d) - Vt * Vt)
        return Pm, Qm

    def residual(self, theta, V, delta, E, extraP):
        """[P balance; Q balance] per bus (pu). extraP: injections (HVDC, pulses)."""
        nb = self.nb
        rP = -self.loadP + extraP
        rQ = -self.loadQ.copy()
        Pm, Qm = self.injections(delta, E, theta, V)
        np.add.at(rP, self.mbus, Pm)
        np.add.at(rQ, self.mbus, Qm)

        dth = theta[self.fi] - theta[self.ti]
        s, c = np.sin(dth), np.cos(dth)
        vv = V[self.fi] * V[self.ti]
        pf = self.b * vv * s
        np.add.at(rP, self.fi, -pf)
        np.add.at(rP, self.ti, pf)
        qf_f = self.b * (V[self.fi] ** 2 - vv * c)
        qf_t = self.b * (V[self.ti] ** 2 - vv * c)
        np.add.at(rQ, self.fi, -qf_f)
        np.add.at(rQ, self.ti, -qf_t)
        return np.concatenate([rP, rQ])

    def jacobian(self, theta, V, delta, E):
        """d residual / d [theta; V], dense."""
        nb = self.nb
        J = np.zeros((2 * nb, 2 * nb))
        dth = theta[self.fi] - theta[self.ti]
        s, c = np.sin(dth), np.cos(dth)
        Vf, Vt = V[self.fi], V[self.ti]
        bvv_c = self.b * Vf * Vt * c
        bvv_s = self.b * Vf * Vt * s

        def acc(rows, cols, vals):
            np.add.at(J, (rows, cols), vals)

        f, t = self.fi, self.ti
        # dP rows (residual includes -flow at f, +flow at t)
        acc(f, f, -bvv_c);          acc(f, t, bvv_c)
        acc(t, f, bvv_c);           acc(t, t, -bvv_c)
        acc(f, nb + f, -self.b * Vt * s);  acc(f, nb + t, -self.b * Vf * s)
        acc(t, nb + f, self.b * Vt * s);   acc(t, nb + t, self.b * Vf * s)
        # dQ rows (residual includes -qf_f at f, -qf_t at t)
        acc(nb + f, f, -bvv_s);     acc(nb + f, t, bvv_s)
        acc(nb + t, f, -bvv_s);     acc(nb + t, t, bvv_s)
        acc(nb + f, nb + f, -self.b * (2 * Vf - Vt * c))
        acc(nb + f, nb + t, self.b * Vf * c)
        acc(nb + t, nb + t, -self.b * (2 * Vt - Vf * c))
        acc(nb + t, nb + f, self.b * Vt * c)

        # machine attachments
        d = delta - theta[self.mbus]
        Vm = V[self.mbus]
        sm, cm = np.sin(d), np.cos(d)
        mb, mi = self.mb, self.mbus
        acc(mi, mi, -mb * E * Vm * cm)
        acc(mi, nb + mi, mb * E * sm)
        acc(nb + mi, mi, mb * E * Vm * sm)
        acc(nb + mi, nb + mi, mb * E * cm - 2 * mb * Vm)
        return J

    def solve(self, delta, E, extraP, theta0, V0, tol=1e-11, maxiter=50):
        theta = theta0.copy()
        V = V0.copy()
        r = self.residual(theta, V, delta, E, extraP)
        norm = np.max(np.abs(r))
        for _ in range(maxiter):
            if norm < tol:
                return theta, V
            J = self.jacobian(theta, V, delta, E)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError as exc:
                raise NetworkSolveError(f"singular network Jacobian: {exc}") from exc
            lam = 1.0
            for _ in range(8):
                th_new = theta + lam * step[:self.nb]
                V_new = V + lam * step[self.nb:]
                if np.all(V_new > 0.05):
                    r_new = self.residual(th_new, V_new, delta, E, extraP)
                    n_new = np.max(np.abs(r_new))
                    if n_new < norm or norm < 1e-8:
                        theta, V, r, norm = th_new, V_new, r_new, n_new
                        break
                lam *= 0.5
            else:
                worst = int(np.argmax(np.abs(r))) % self.nb
                raise NetworkSolveError(
                    f"network Newton stalled, residual {norm:.3e}",
                    worst_bus=self.ids[worst])
        worst = int(np.argmax(np.abs(r))) % self.nb
        raise NetworkSolveError(f"network Newton did not converge, residual {norm:.3e}",
                                worst_bus=self.ids[worst])


# ---------------------------------------------------------------------------
# equilibrium
# ---------------------------------------------------------------------------

def solve_equilibrium(model):
    """Initial power flow (machines PV, one slack) and EMF back-calculation.

    Returns an OperatingPoint with machine internal angles/EMFs, bus voltages,
    and the solved mechanical powers (slack absorbs the imbalance; the network
    is lossless so total generation equals total load).
    """
    net = _Network(model)
    nb = net.nb
    base = model.system_base
    mach = model.machines
    mterm = net.mbus
    slack_bus = net.idx[mach[model.slack_machine].bus]

    # scheduled machine injections (pu); slack machine's P is free
    Psched = np.zeros(nb)
    for k, m in enumerate(mach):
        if k != model.slack_machine:
            Psched[net.idx[m.bus]] += m.P_mech / base

    Vset = np.ones(nb)
    is_gen = np.zeros(nb, dtype=bool)
    for m in mach:
        i = net.idx[m.bus]
        is_gen[i] = True
        Vset[i] = m.Vset

    theta = np.zeros(nb)
    V = Vset.copy()

    th_unknown = [i for i in range(nb) if i != slack_bus]
    v_unknown = [i for i in range(nb) if not is_gen[i]]
    p_rows = [i for i in range(nb) if i != slack_bus]
    q_rows = [i for i in range(nb) if not is_gen[i]]

    def pf_residual(theta, V):
        rP = Psched - net.loadP
        rQ = -net.loadQ.copy()
        dth = theta[net.fi] - theta[net.ti]
        s, c = np.sin(dth), np.cos(dth)
        vv = V[net.fi] * V[net.ti]
        pf = net.b * vv * s
        np.add.at(rP, net.fi, -pf)
        np.add.at(rP, net.ti, pf)
        qf_f = net.b * (V[net.fi] ** 2 - vv * c)
        qf_t = net.b * (V[net.ti] ** 2 - vv * c)
        np.add.at(rQ, net.fi, -qf_f)
        np.add.at(rQ, net.ti, -qf_t)
        return rP, rQ

    for it in range(60):
        rP, rQ = pf_residual(theta, V)
        r = np.concatenate([rP[p_rows], rQ[q_rows]])
        if r.size == 0 or np.max(np.abs(r)) < 1e-12:
            break
        # full Jacobian of the line part (no machine branches in the PF stage)
        Jfull = _Network.jacobian(net, theta, V, np.zeros(len(mach)), np.zeros(len(mach)))
        # zero out machine attachment terms (E = 0 already handles P/Q rows)
        rows = np.array(p_rows + [nb + q for q in q_rows])
        cols = np.array(th_unknown + [nb + v for v in v_unknown])
        J = Jfull[np.ix_(rows, cols)]
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError(f"power flow Jacobian singular: {exc}") from exc
        theta = theta.copy()
        V = V.copy()
        theta[th_unknown] += step[:len(th_unknown)]
        V[v_unknown] += step[len(th_unknown):]
        if np.any(np.abs(theta) > 4.0):
            raise ConfigurationError("power flow diverged (angles beyond 4 rad); "
                                     "operating target unreachable")
    else:
        raise ConfigurationError("power flow did not converge in 60 iterations")

    # per-bus machine P/Q absorbed at generator buses
    rP, rQ = pf_residual(theta, V)
    P_gen_bus = Psched.copy()
    P_gen_bus[slack_bus] = Psched[slack_bus] - rP[slack_bus]
    Q_gen_bus = np.zeros(nb)
    Q_gen_bus[is_gen] = -rQ[is_gen]

    # split bus-level generation across co-located machines equally
    counts = np.zeros(nb)
    for m in mach:
        counts[net.idx[m.bus]] += 1.0
    delta0 = np.zeros(len(mach))
    E = np.zeros(len(mach))
    P_mech = np.zeros(len(mach))
    for k, m in enumerate(mach):
        i = net.idx[m.bus]
        share = 1.0 / counts[i]
        # scheduled machines keep their schedule; the slack takes the balance
        if k != model.slack_machine:
            Pk = m.P_mech / base
        else:
            Pk = P_gen_bus[i] - sum(mm.P_mech / base for j, mm in enumerate(mach)
                                    if j != k and net.idx[mm.bus] == i)
        Qk = Q_gen_bus[i] * share
        Vph = V[i] * np.exp(1j * theta[i])
        I = np.conj((Pk + 1j * Qk) / Vph)
        Eph = Vph + 1j * m.Xd_prime * I
        E[k] = abs(Eph)
        delta0[k] = np.angle(Eph)
        P_mech[k] = Pk * base

    # verify the dynamic algebraic system reproduces the power flow
    extraP = np.zeros(nb)
    if model.hvdc is not None and model.hvdc.P0 != 0.0:
        extraP[net.idx[model.hvdc.from_bus]] += model.hvdc.P0 / base
        extraP[net.idx[model.hvdc.to_bus]] -= model.hvdc.P0 / base
        theta, V = net.solve(delta0, E, extraP, theta, V)
    res = net.residual(theta, V, delta0, E, extraP)
    residual = float(np.max(np.abs(res)))
    if residual > 1e-10:
        raise ConfigurationError(f"equilibrium residual {residual:.2e} exceeds 1e-10 pu")

    total_gen = float(np.sum(P_mech)) / base
    total_load = float(np.sum(net.loadP))
    if abs(total_gen - total_load) > 1e-6:
        raise ConfigurationError("generation/load balance violated at equilibrium")

    return OperatingPoint(delta0=delta0, E=E, theta0=theta, V0=V,
                          P_mech=P_mech, residual=residual)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def kundur_two_area(inertia_scale=0.75, interarea_flow=500.0, hvdc_limit=75.0,
                    damping_per_unit_inertia=0.25):
    """Modified two-area four-machine benchmark (classical-machine desk model).

    Four 900 MVA machines (buses 1-4), two load buses (7, 9), a corridor
    7-8-9 between the areas, and an embedded HVDC link 7 -> 9.
    ``interarea_flow`` MW crosses the corridor at equilibrium (set through the
    load split), inertia is scaled by ``inertia_scale``, and machine damping
    is D = damping_per_unit_inertia * M, which lands the inter-area mode in
    the 0.4-0.8 Hz band with a few percent damping.

    Calibration note: classical machines hold E' constant, so they lack the
    transient excitation support that lets a detailed model ride through
    severe pulses at this stress level. To keep 350 MW / 1 s pulses inside
    the solvable (first-swing-stable) region the corridor runs three circuits
    per section and carries explicit shunt compensation at buses 7, 8, 9,
    with slightly raised excitation setpoints.
    """
    if not (0.0 < inertia_scale <= 1.5):
        raise ConfigurationError("inertia_scale must be in (0, 1.5]")
    base = 100.0
    f_s = 60.0
    w_s = 2 * np.pi * f_s

    gens = {1: (6.5, 1.05), 2: (6.5, 1.03), 3: (6.175, 1.05), 4: (6.175, 1.03)}
    S_mach = 900.0
    total_gen = 2734.0
    P_sched = {1: 700.0, 2: 700.0, 4: 700.0}   # machine 3 is the slack
    load7 = P_sched[1] + P_sched[2] - interarea_flow
    load9 = total_gen - load7
    if load7 <= 0 or load9 <= 0:
        raise ConfigurationError("requested inter-area flow leaves a nonpositive load")

    buses = tuple([Bus(i) for i in (1, 2, 3, 4, 5, 6, 10, 11)]
                  + [Bus(7, load_P=load7, load_Q=-200.0),
                     Bus(8, load_P=0.0, load_Q=-200.0),
                     Bus(9, load_P=load9, load_Q=-400.0)])
    xfmr = 0.15 * base / S_mach

    def xline(length_km):
        return 0.001 * length_km  # pu/km on the 100 MVA, 230 kV base

    lines = (
        Line(1, 5, xfmr), Line(2, 6, xfmr), Line(3, 11, xfmr), Line(4, 10, xfmr),
        Line(5, 6, xline(25.0)), Line(6, 7, xline(10.0)),
        Line(7, 8, xline(110.0), count=3), Line(8, 9, xline(110.0), count=3),
        Line(9, 10, xline(10.0)), Line(10, 11, xline(25.0)),
    )
    machines = []
    for bus_id in (1, 2, 3, 4):
        H, vset = gens[bus_id]
        M = 2.0 * H * S_mach / w_s * inertia_scale
        machines.append(Machine(bus=bus_id, M=M, D=damping_per_unit_inertia * M,
                                Xd_prime=0.3 * base / S_mach,
                                P_mech=P_sched.get(bus_id, 0.0), Vset=vset))
    model = GridModel(buses=buses, lines=lines, machines=tuple(machines),
                      hvdc=Hvdc(from_bus=7, to_bus=9, P0=0.0, limit=hvdc_limit),
                      system_base=base, f_s=f_s, slack_machine=2)

    op = solve_equilibrium(model)
    flow = line_flow(model, op.theta0, op.V0, 7, 8)
    if abs(flow - interarea_flow) > 0.5:
        raise ConfigurationError(
            f"corridor flow {flow:.2f} MW missed target {interarea_flow} MW")
    return model


def line_flow(model, theta, V, from_bus, to_bus):
    """Total MW over all circuits of the (from, to) corridor section."""
    net = _Network(model)
    i, j = net.idx[from_bus], net.idx[to_bus]
    total = 0.0
    for ln in model.lines:
        if {ln.from_bus, ln.to_bus} == {from_bus, to_bus}:
            sgn = 1.0 if ln.from_bus == from_bus else -1.0
            total += sgn * ln.count * (V[i] * V[j] / ln.X) * np.sin(theta[i] - theta[j])
    return total * model.system_base


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def _measure_value(spec, net, model, delta, omega, theta, V, xf):
    """Instantaneous measurement (xf: filter state for freq_bus, else None).

    theta_bus is the synchronous-frame (absolute) bus angle; its deviation
    from the equilibrium value is what controllers see. Recorded trajectory
    angles use the machine-1 rotor frame instead (see simulate).
    """
    kind = spec.kind
    if kind == "machine_speed":
        return omega[int(spec.location)]
    if kind == "theta_bus":
        return theta[net.idx[int(spec.location)]]
    if kind == "bus_Vmag":
        return V[net.idx[int(spec.location)]]
    if kind == "line_P":
        fb, tb = spec.location
        for ln in model.lines:
            if {ln.from_bus, ln.to_bus} == {fb, tb}:
                i, j = net.idx[fb], net.idx[tb]
                return (V[i] * V[j] / ln.X) * np.sin(theta[i] - theta[j]) \
                    * model.system_base
        raise ConfigurationError(f"no line between buses {fb} and {tb}")
    if kind == "freq_bus":
        th = theta[net.idx[int(spec.location)]]
        return spec.freq_lp_corner * (th - xf)
    raise ConfigurationError(f"unknown measurement kind {kind}")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate(model, controllers=(), disturbances=(), dt=0.005, t_end=20.0, op=None):
    """Fixed-step RK4 with the algebraic network re-solved at every stage.

    Controllers follow the package-wide negative feedback convention
    u = -K (y - y_eq) and must be strictly proper state-space systems; their
    commanded powers sum onto the HVDC modulation, hard-saturated at the link
    limit. Delayed measurements read a ring buffer of step-boundary values
    with linear interpolation.

    Returns a Trajectory with machine angles/speeds, bus angles (machine-1
    rotor frame), bus voltage magnitudes, HVDC injections, and the raw
    measurement of every controller. Early termination on separation or
    network collapse flags ``separated`` and returns the partial record.
    """
    if dt > 0.010 or dt <= 0:
        raise ConfigurationError("time step must be positive and at most 10 ms")
    for loop in controllers:
        if np.any(loop.controller.D != 0.0):
            raise ConfigurationError("controllers must be strictly proper (D = 0)")
        if loop.actuator != "hvdc":
            raise ConfigurationError(f"unknown actuator {loop.actuator!r}")
        if loop.controller.n_inputs != len(loop.specs()):
            raise ConfigurationError("controller input count must match its measurements")
        for spec in loop.specs():
            if 0.0 < spec.delay < dt:
                raise ConfigurationError("measurement delay must be zero or at least one step")
    if controllers and model.hvdc is None:
        raise ConfigurationError("controllers require an HVDC link in the model")

    net = _Network(model)
    if op is None:
        op = solve_equilibrium(model)
    base = model.system_base
    nm = len(model.machines)
    M = np.array([m.M for m in model.machines])
    D = np.array([m.D for m in model.machines])
    Pm = op.P_mech.copy()

    # flat channel list: (controller index, input column, spec)
    channels = [(i, j, spec) for i, lp in enumerate(controllers)
                for j, spec in enumerate(lp.specs())]

    # state packing: [delta, omega, xf (freq filters), xc...]
    freq_channels = [c for c, (_, _, spec) in enumerate(channels)
                     if spec.kind == "freq_bus"]
    n_xf = len(freq_channels)
    xf_of_channel = {c: k for k, c in enumerate(freq_channels)}
    xf_slice = slice(2 * nm, 2 * nm + n_xf)
    xc_slices = []
    pos = 2 * nm + n_xf
    for lp in controllers:
        nk = lp.controller.n_states
        xc_slices.append(slice(pos, pos + nk))
        pos += nk
    n_state = pos

    # equilibrium measurement values (freq filters settle at theta)
    theta_eq, V_eq = op.theta0, op.V0
    y_eq = []
    for _, _, spec in channels:
        xf0 = theta_eq[net.idx[int(spec.location)]] if spec.kind == "freq_bus" else None
        y_eq.append(_measure_value(spec, net, model, op.delta0, np.zeros(nm),
                                   theta_eq, V_eq, xf0))

    hvdc = model.hvdc
    if hvdc is not None:
        hf, ht = net.idx[hvdc.from_bus], net.idx[hvdc.to_bus]

    n_steps = int(round(t_end / dt))
    times = np.arange(n_steps + 1) * dt

    dist = list(disturbances)

    def load_extra(t):
        extra = np.zeros(net.nb)
        for d in dist:
            if d.t_start <= t < d.t_start + d.duration:
                extra[net.idx[d.bus]] -= d.delta_P / base
        return extra

    warm = {"theta": theta_eq.copy(), "V": V_eq.copy()}
    hist = [np.full(n_steps + 1, y_eq[c]) for c in range(len(channels))]

    def deriv(t, s, step_idx):
        delta = s[:nm]
        omega = s[nm:2 * nm]
        xf = s[xf_slice]
        u_raw = 0.0
        for i, lp in enumerate(controllers):
            xc = s[xc_slices[i]]
            u_raw -= (lp.controller.C @ xc).item()  # u = -K y convention
        if hvdc is not None:
            u_sat = float(np.clip(u_raw, -hvdc.limit, hvdc.limit))
        else:
            u_sat = 0.0

        extraP = load_extra(t)
        if hvdc is not None:
            p0u = (hvdc.P0 + u_sat) / base
            extraP[hf] += p0u
            extraP[ht] -= p0u
        theta, V = net.solve(delta, op.E, extraP, warm["theta"], warm["V"],
                             tol=1e-10, maxiter=40)
        warm["theta"], warm["V"] = theta, V

        Pe, _ = net.injections(delta, op.E, theta, V)
        ds = np.zeros(n_state)
        ds[:nm] = omega
        ds[nm:2 * nm] = (Pm - Pe * base - D * omega) / M

        y_now = np.empty(len(channels))
        for c, (_, _, spec) in enumerate(channels):
            xf_val = xf[xf_of_channel[c]] if c in xf_of_channel else None
            y_now[c] = _measure_value(spec, net, model, delta, omega, theta, V, xf_val)
            if c in xf_of_channel:
                th = theta[net.idx[int(spec.location)]]
                ds[xf_slice][xf_of_channel[c]] = spec.freq_lp_corner * (th - xf[xf_of_channel[c]])

        for i, lp in enumerate(controllers):
            xc = s[xc_slices[i]]
            dxc = lp.controller.A @ xc
            for c, (ci, j, spec) in enumerate(channels):
                if ci != i:
                    continue
                if spec.delay == 0.0:
                    y_in = y_now[c]
                else:
                    tq = t - spec.delay
                    y_in = y_eq[c] if tq <= 0.0 else float(np.interp(tq, times, hist[c]))
                dxc = dxc + lp.controller.B[:, j] * (y_in - y_eq[c])
            ds[xc_slices[i]] = dxc
        return ds, (theta, V, u_sat, y_now)

    # initial state
    s = np.zeros(n_state)
    s[:nm] = op.delta0
    for c, (_, _, spec) in enumerate(channels):
        if c in xf_of_channel:
            s[xf_slice][xf_of_channel[c]] = theta_eq[net.idx[int(spec.location)]]

    labels_theta = [f"theta_{b}" for b in net.ids]
    labels_v = [f"vmag_{b}" for b in net.ids]
    sig = {f"delta_{k+1}": [] for k in range(nm)}
    sig.update({f"omega_{k+1}": [] for k in range(nm)})
    sig.update({lbl: [] for lbl in labels_theta})
    sig.update({lbl: [] for lbl in labels_v})
    sig["hvdc_u"] = []
    sig["hvdc_P_from"] = []
    sig["hvdc_P_to"] = []
    chan_labels = [f"y{c}_{spec.label()}" for c, (_, _, spec) in enumerate(channels)]
    for lbl in chan_labels:
        sig[lbl] = []

    separated = False
    n_done = 0

    def record(s, aux):
        delta = s[:nm]
        omega = s[nm:2 * nm]
        theta, V, u_sat, y_now = aux
        for k in range(nm):
            sig[f"delta_{k+1}"].append(delta[k])
            sig[f"omega_{k+1}"].append(omega[k])
        for j, lbl in enumerate(labels_theta):
            sig[lbl].append(theta[j] - delta[0])  # rotor-frame recording
        for j, lbl in enumerate(labels_v):
            sig[lbl].append(V[j])
        sig["hvdc_u"].append(u_sat)
        sig["hvdc_P_from"].append(u_sat + (hvdc.P0 if hvdc else 0.0))
        sig["hvdc_P_to"].append(-(u_sat + (hvdc.P0 if hvdc else 0.0)))
        for c, lbl in enumerate(chan_labels):
            sig[lbl].append(y_now[c])

    for step in range(n_steps + 1):
        t = times[step]
        try:
            k1, aux = deriv(t, s, step)
        except NetworkSolveError:
            separated = True
            break
        record(s, aux)
        for c in range(len(channels)):
            hist[c][step] = aux[3][c]
        n_done = step + 1
        if step == n_steps:
            break
        delta = s[:nm]
        if np.max(delta) - np.min(delta) > np.pi:
            separated = True
            break
        try:
            k2, _ = deriv(t + dt / 2, s + dt / 2 * k1, step)
            k3, _ = deriv(t + dt / 2, s + dt / 2 * k2, step)
            k4, _ = deriv(t + dt, s + dt * k3, step)
        except NetworkSolveError:
            separated = True
            break
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)) or np.max(np.abs(s[nm:2 * nm])) > 1e3:
            separated = True
            break

    time = times[:n_done]
    signals = {k: np.array(v[:n_done]) for k, v in sig.items()}
    meta = {"dt": dt, "solver": "rk4", "model_hash": model.hash(),
            "separated": separated, "t_end": float(time[-1]) if n_done else 0.0}
    return Trajectory(time=time, signals=signals, metadata=meta)


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------

def linearize(model, load_buses=(), include_hvdc=True, outputs=(), op=None,
              deflate_reference=True, fd_step=1e-6, theta_washout=None):
    """Central-difference linearization around the solved equilibrium.

    States: machine (delta, omega) pairs plus one low-pass state per freq_bus
    output and two wash-out states per theta_bus output when
    ``theta_washout`` (corner, rad/s) is given. Inputs: HVDC modulation (MW)
    first when requested, then one added load (MW) per bus in ``load_buses``.
    Outputs follow ``outputs`` (sequence of MeasurementSpec; delays are
    ignored here and belong to the design stage).

    theta_bus means the absolute synchronous-frame angle, matching the
    simulator's measurement. That channel observes the angle-reference zero
    mode, so with ``deflate_reference`` a wash-out corner is required: the
    output becomes s/(s+corner) applied to the absolute angle, realized in
    relative coordinates (the rotor-frame part plus the integrated machine-1
    speed), and the deployed controller must cascade the same wash-out.
    """
    net = _Network(model)
    if op is None:
        op = solve_equilibrium(model)
    base = model.system_base
    nm = len(model.machines)
    M = np.array([m.M for m in model.machines])
    D = np.array([m.D for m in model.machines])
    Pm = op.P_mech.copy()

    inputs = (["hvdc"] if include_hvdc else []) + [f"load_{b}" for b in load_buses]
    if include_hvdc and model.hvdc is None:
        raise ConfigurationError("model has no HVDC link")
    m_in = len(inputs)

    freq_specs = [sp for sp in outputs if sp.kind == "freq_bus"]
    theta_specs = [sp for sp in outputs if sp.kind == "theta_bus"]
    n_xf = len(freq_specs)
    n_xw = 2 * len(theta_specs) if theta_washout is not None else 0
    if theta_specs and deflate_reference and theta_washout is None:
        raise ConfigurationError(
            "theta_bus outputs observe the angle-reference mode; pass "
            "theta_washout=<corner rad/s> (or deflate_reference=False)")

    warm = {"theta": op.theta0.copy(), "V": op.V0.copy()}

    def solve_net(delta, u):
        extraP = np.zeros(net.nb)
        col = 0
        if include_hvdc:
            p = u[0] / base
            extraP[net.idx[model.hvdc.from_bus]] += p
            extraP[net.idx[model.hvdc.to_bus]] -= p
            col = 1
        for j, b in enumerate(load_buses):
            extraP[net.idx[b]] -= u[col + j] / base
        theta, V = net.solve(delta, op.E, extraP, warm["theta"], warm["V"])
        warm["theta"], warm["V"] = theta.copy(), V.copy()
        return theta, V

    def core_f(x, u):
        """Machine-state derivative and the algebraic solution."""
        delta = x[:nm]
        omega = x[nm:]
        theta, V = solve_net(delta, u)
        Pe, _ = net.injections(delta, op.E, theta, V)
        dd = omega
        dw = (Pm - Pe * base - D * omega) / M
        return np.concatenate([dd, dw]), theta, V

    def outputs_at(x, u, theta, V):
        delta = x[:nm]
        omega = x[nm:]
        vals = []
        for sp in outputs:
            if sp.kind == "freq_bus":
                vals.append(theta[net.idx[int(sp.location)]])  # raw angle; filter added later
            elif sp.kind == "theta_bus":
                # rotor-frame part; the delta_1 contribution is reattached below
                vals.append(theta[net.idx[int(sp.location)]] - delta[0])
            else:
                vals.append(_measure_value(sp, net, model, delta, omega, theta, V, None))
        return np.array(vals)

    x0 = np.concatenate([op.delta0, np.zeros(nm)])
    u0 = np.zeros(m_in)
    f0, theta0, V0 = core_f(x0, u0)
    g0 = outputs_at(x0, u0, theta0, V0)

    n_core = 2 * nm
    A_core = np.zeros((n_core, n_core))
    G_x = np.zeros((len(outputs), n_core))
    for k in range(n_core):
        h = fd_step * max(1.0, abs(x0[k]))
        xp = x0.copy(); xp[k] += h
        xm = x0.copy(); xm[k] -= h
        fp, tp, vp = core_f(xp, u0)
        gp = outputs_at(xp, u0, tp, vp)
        fm, tm, vm = core_f(xm, u0)
        gm = outputs_at(xm, u0, tm, vm)
        A_core[:, k] = (fp - fm) / (2 * h)
        G_x[:, k] = (gp - gm) / (2 * h)

    B_core = np.zeros((n_core, m_in))
    G_u = np.zeros((len(outputs), m_in))
    for k in range(m_in):
        h = fd_step * max(1.0, base)
        up = u0.copy(); up[k] += h
        um = u0.copy(); um[k] -= h
        fp, tp, vp = core_f(x0, up)
        gp = outputs_at(x0, up, tp, vp)
        fm, tm, vm = core_f(x0, um)
        gm = outputs_at(x0, um, tm, vm)
        B_core[:, k] = (fp - fm) / (2 * h)
        G_u[:, k] = (gp - gm) / (2 * h)

    # assemble with freq_bus low-pass and theta_bus wash-out states appended
    n = n_core + n_xf + n_xw
    A = np.zeros((n, n))
    A[:n_core, :n_core] = A_core
    B = np.zeros((n, m_in))
    B[:n_core, :] = B_core
    C = np.zeros((len(outputs), n))
    Dmat = np.zeros((len(outputs), m_in))
    fi = 0
    wi = 0
    for row, sp in enumerate(outputs):
        if sp.kind == "freq_bus":
            wc = sp.freq_lp_corner
            j = n_core + fi
            A[j, :n_core] = wc * G_x[row, :]
            A[j, j] = -wc
            B[j, :] = wc * G_u[row, :]
            C[row, :n_core] = wc * G_x[row, :]
            C[row, j] = -wc
            Dmat[row, :] = wc * G_u[row, :]
            fi += 1
        elif sp.kind == "theta_bus" and theta_washout is not None:
            # y = s/(s+ww) * theta_abs = (rel - ww*xa) + xb,
            # xa' = -ww xa + rel, xb' = -ww xb + omega_1
            ww = theta_washout
            ja = n_core + n_xf + 2 * wi
            jb = ja + 1
            A[ja, :n_core] = G_x[row, :]
            A[ja, ja] = -ww
            B[ja, :] = G_u[row, :]
            A[jb, nm] = 1.0          # machine-1 speed
            A[jb, jb] = -ww
            C[row, :n_core] = G_x[row, :]
            C[row, ja] = -ww
            C[row, jb] = 1.0
            Dmat[row, :] = G_u[row, :]
            wi += 1
        elif sp.kind == "theta_bus":
            # absolute angle: rotor-frame row plus delta_1 itself
            C[row, :n_core] = G_x[row, :]
            C[row, 0] += 1.0
            Dmat[row, :] = G_u[row, :]
        else:
            C[row, :n_core] = G_x[row, :]
            Dmat[row, :] = G_u[row, :]

    out_labels = [sp.label() for sp in outputs]
    sys = StateSpace(A, B, C, Dmat, input_labels=inputs, output_labels=out_labels)

    if not deflate_reference:
        return sys

    # uniform angle shift direction: all deltas and freq filter states
    shift = np.zeros(n)
    shift[:nm] = 1.0
    shift[n_core:n_core + n_xf] = 1.0
    c_shift = C @ shift
    if np.max(np.abs(c_shift)) > 1e-6 * max(1.0, np.max(np.abs(C))):
        raise ConfigurationError("requested outputs observe the angle-reference mode; "
                                 "use rotor-frame or difference measurements")
    # T drops delta_1, mapping angle-like states to differences against it
    nr = n - 1
    T = np.zeros((nr, n))
    R = np.zeros((n, nr))
    for i in range(1, nm):           # delta_i - delta_1
        T[i - 1, i] = 1.0
        T[i - 1, 0] = -1.0
        R[i, i - 1] = 1.0
    for i in range(nm):              # speeds unchanged
        T[nm - 1 + i, nm + i] = 1.0
        R[nm + i, nm - 1 + i] = 1.0
    for j in range(n_xf):            # xf_j - delta_1
        T[2 * nm - 1 + j, n_core + j] = 1.0
        T[2 * nm - 1 + j, 0] = -1.0
        R[n_core + j, 2 * nm - 1 + j] = 1.0
    for j in range(n_xw):            # wash-out states are shift invariant
        T[2 * nm - 1 + n_xf + j, n_core + n_xf + j] = 1.0
        R[n_core + n_xf + j, 2 * nm - 1 + n_xf + j] = 1.0
    Ar = T @ A @ R
    Br = T @ B
    Cr = C @ R
    return StateSpace(Ar, Br, Cr, Dmat, input_labels=inputs, output_labels=out_labels)


# ---------------------------------------------------------------------------
# offline measurement and diagnostics
# ---------------------------------------------------------------------------

def measure_offline(traj, spec, model=None):
    """Derive a measurement series from recorded raw trajectory signals."""
    t = traj.time
    sig = traj.signals

    def theta_abs(bus):
        key = f"theta_{bus}"
        if key not in sig or "delta_1" not in sig:
            raise KeyError(f"trajectory lacks {key}/delta_1")
        return sig[key] + sig["delta_1"]

    if spec.kind == "machine_speed":
        out = sig[f"omega_{int(spec.location) + 1}"].copy()
    elif spec.kind == "theta_bus":
        out = theta_abs(int(spec.location))  # absolute synchronous-frame angle
    elif spec.kind == "bus_Vmag":
        out = sig[f"vmag_{int(spec.location)}"].copy()
    elif spec.kind == "line_P":
        if model is None:
            raise ValueError("line_P offline measurement needs the model (reactances)")
        fb, tb = spec.location
        for ln in model.lines:
            if {ln.from_bus, ln.to_bus} == {fb, tb}:
                th = theta_abs(fb) - theta_abs(tb)
                out = (sig[f"vmag_{fb}"] * sig[f"vmag_{tb}"] / ln.X) * np.sin(th) \
                    * model.system_base
                break
        else:
            raise ConfigurationError(f"no line between {fb} and {tb}")
    elif spec.kind == "freq_bus":
        th = theta_abs(int(spec.location))
        wc = spec.freq_lp_corner
        dt = float(t[1] - t[0]) if t.size > 1 else 1.0
        a = np.exp(-wc * dt)
        x = np.empty_like(th)
        x[0] = th[0]
        # exact ZOH step of dx/dt = wc (theta - x) with midpoint-held input
        for k in range(th.size - 1):
            u_mid = 0.5 * (th[k] + th[k + 1])
            x[k + 1] = a * x[k] + (1.0 - a) * u_mid
        out = wc * (th - x)
    else:
        raise ConfigurationError(f"unknown measurement kind {spec.kind}")

    if spec.delay > 0.0:
        out = np.interp(t - spec.delay, t, out, left=out[0])
    return out


def total_energy(model, op, delta, omega, theta, V):
    """Kinetic plus network potential (pu-energy units).

    Conserved along undisturbed, undamped, uncontrolled trajectories: the
    potential collects branch terms (V_a^2 + V_b^2 - 2 V_a V_b cos)/2X over
    lines and machine reactances, minus mechanical work, plus load terms
    P_L theta and Q_L ln V.
    """
    net = _Network(model)
    base = model.system_base
    Mpu = np.array([m.M for m in model.machines]) / base
    kin = 0.5 * float(np.sum(Mpu * np.asarray(omega) ** 2))

    pot = 0.0
    Vf, Vt = V[net.fi], V[net.ti]
    dth = theta[net.fi] - theta[net.ti]
    pot += float(np.sum(net.b * (Vf ** 2 + Vt ** 2 - 2 * Vf * Vt * np.cos(dth)) / 2.0))
    Vm = V[net.mbus]
    dm = np.asarray(delta) - theta[net.mbus]
    pot += float(np.sum(net.mb * (op.E ** 2 + Vm ** 2 - 2 * op.E * Vm * np.cos(dm)) / 2.0))
    pot -= float(np.sum((op.P_mech / base) * np.asarray(delta)))
    pot += float(np.sum(net.loadP * theta))
    pot += float(np.sum(net.loadQ * np.log(V)))
    return kin + pot
