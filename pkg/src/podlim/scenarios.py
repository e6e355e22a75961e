"""Declarative scenario runner and paper-figure analogs.

Every entry point writes CSV/JSON artifacts plus a manifest with content
hashes into an output directory; runs are deterministic, so repeated runs are
byte identical. Figure analogs are named by the figure they correspond to,
with an explicit "analog, not bit-reproduction" note in each manifest.
"""

from __future__ import annotations

import json
import os

import numpy as np
import scipy.signal

from . import studies
from .artifacts import bode_rows, write_csv, write_json, write_manifest
from .lti import FrequencyGrid, StateSpace, freq_response, poles, ss_to_tf
from .sensitivity import attenuation_band
from .gridsim import Disturbance, simulate
from .two_machine import TwoMachineParams, build_state_space, performance_tfs, \
    zero_frequencies
from .modal import damping_ratio, decompose

__all__ = ["CONFIG_SCHEMA", "ConfigError", "NumericError", "run_config",
           "repro", "FIGURES", "default_grid"]


class ConfigError(ValueError):
    """Scenario config violates the schema or references missing data."""


class NumericError(RuntimeError):
    """A numeric stage of the scenario failed."""


def default_grid(spec=None):
    spec = spec or {}
    return FrequencyGrid.log_spaced(spec.get("min", 1e-2), spec.get("max", 1e2),
                                    spec.get("points", 400))


_GRID_SCHEMA = {
    "type": "object",
    "properties": {
        "min": {"type": "number", "exclusiveMinimum": 0},
        "max": {"type": "number", "exclusiveMinimum": 0},
        "points": {"type": "integer", "minimum": 2},
    },
    "additionalProperties": False,
}

_TM_PARAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "M1": {"type": "number"}, "M2": {"type": "number"},
        "D1": {"type": "number"}, "D2": {"type": "number"},
        "X1": {"type": "number"}, "X2": {"type": "number"},
    },
    "required": ["M1", "M2", "D1", "D2", "X1", "X2"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "podlim scenario configuration",
    "type": "object",
    "properties": {
        "kind": {"enum": ["two_machine_analysis", "filter_design",
                          "feedback_analysis", "modal", "synthesize",
                          "simulate", "linearize"]},
        "outputs": {"type": "string"},
        "grid": _GRID_SCHEMA,
        "parameters": {"type": "object"},
    },
    "required": ["kind", "outputs", "parameters"],
    "additionalProperties": False,
}

_KIND_PARAM_SCHEMAS = {
    "two_machine_analysis": {
        "type": "object",
        "properties": {"two_machine": _TM_PARAMS_SCHEMA},
        "required": ["two_machine"],
        "additionalProperties": False,
    },
    "filter_design": {
        "type": "object",
        "properties": {
            "two_machine": _TM_PARAMS_SCHEMA,
            "d_weights": {"type": "array", "items": {"type": "number"},
                          "minItems": 2, "maxItems": 2},
            "noise": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["two_machine"],
        "additionalProperties": False,
    },
    "feedback_analysis": {
        "type": "object",
        "properties": {
            "two_machine": _TM_PARAMS_SCHEMA,
            "d_weights": {"type": "array", "items": {"type": "number"},
                          "minItems": 2, "maxItems": 2},
            "noise": {"type": "number", "exclusiveMinimum": 0},
            "Kz": {"type": "number"},
        },
        "required": ["two_machine"],
        "additionalProperties": False,
    },
    "modal": {
        "type": "object",
        "properties": {
            "preset": {"enum": ["kundur_two_area"]},
            "inertia_scale": {"type": "number"},
            "interarea_flow": {"type": "number"},
            "hvdc_limit": {"type": "number"},
        },
        "required": ["preset"],
        "additionalProperties": False,
    },
    "synthesize": {
        "type": "object",
        "properties": {
            "preset": {"enum": ["kundur_two_area"]},
            "design": {"enum": ["theta9", "wams", "line_P", "V9", "pss"]},
            "target_damping": {"type": "number", "exclusiveMinimum": 0,
                               "maximum": 0.5},
        },
        "required": ["preset", "design"],
        "additionalProperties": False,
    },
    "simulate": {
        "type": "object",
        "properties": {
            "preset": {"enum": ["kundur_two_area"]},
            "design": {"enum": ["theta9", "wams", "line_P", "V9", "pss",
                                "open_loop"]},
            "disturbances": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"bus": {"type": "integer"},
                                   "delta_P": {"type": "number"},
                                   "t_start": {"type": "number"},
                                   "duration": {"type": "number"}},
                    "required": ["bus", "delta_P", "t_start", "duration"],
                    "additionalProperties": False,
                },
            },
            "dt": {"type": "number", "exclusiveMinimum": 0},
            "t_end": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["preset", "disturbances"],
        "additionalProperties": False,
    },
    "linearize": {
        "type": "object",
        "properties": {
            "preset": {"enum": ["kundur_two_area"]},
            "load_buses": {"type": "array", "items": {"type": "integer"}},
        },
        "required": ["preset"],
        "additionalProperties": False,
    },
}


def _validate(config):
    import jsonschema
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
        jsonschema.validate(config["parameters"], _KIND_PARAM_SCHEMAS[config["kind"]])
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message) from exc


def _tm_params(d):
    return TwoMachineParams(M1=d["M1"], M2=d["M2"], D1=d["D1"], D2=d["D2"],
                            X1star=d["X1"], X2star=d["X2"])


_STUDY_CACHE = {}


def _get_study():
    if "desk" not in _STUDY_CACHE:
        _STUDY_CACHE["desk"] = studies.desk_study()
    return _STUDY_CACHE["desk"]


def _get_design(name, study):
    key = ("design", name)
    if key not in _STUDY_CACHE:
        if name == "theta9":
            _STUDY_CACHE[key] = studies.design_theta9(study)
        elif name == "wams":
            _STUDY_CACHE[key] = studies.design_wams(study)
        elif name == "line_P":
            _STUDY_CACHE[key] = studies.design_line_power(study)
        elif name == "V9":
            _STUDY_CACHE[key] = studies.design_bus_voltage(study)
        elif name == "pss":
            _STUDY_CACHE[key] = studies.design_pss(study)[0]
        else:
            raise ConfigError(f"unknown design {name!r}")
    return _STUDY_CACHE[key]


# ---------------------------------------------------------------------------
# scenario runners
# ---------------------------------------------------------------------------

def _run_two_machine_analysis(params, outdir, grid):
    p = _tm_params(params["two_machine"])
    undamped = TwoMachineParams(M1=p.M1, M2=p.M2, D1=0.0, D2=0.0,
                                X1star=p.X1star, X2star=p.X2star)
    tfs = performance_tfs(undamped)
    files = []
    for name, tf in sorted(tfs.items()):
        resp = freq_response(tf, _offset(grid, tf))
        fn = f"channel_{name}.csv"
        write_csv(os.path.join(outdir, fn), ("omega", "mag", "phase_deg"),
                  bode_rows(grid.omegas, resp))
        files.append(fn)
    q1, q2 = zero_frequencies(undamped)
    ss = build_state_space(p)
    summary = {
        "poles_undamped": _cplx_list(poles(build_state_space(undamped))),
        "poles": _cplx_list(poles(ss)),
        "q1": q1, "q2": q2,
    }
    return files, summary, {"band": [q1, q2]}


def _offset(grid, tf):
    """Nudge the grid off imaginary-axis poles of tf (undamped benchmarks)."""
    try:
        freq_response(tf, grid)
        return grid
    except ValueError:
        return FrequencyGrid(grid.omegas * (1.0 + 3.7e-9))


def _filter_design(params):
    p = _tm_params(params["two_machine"])
    d_weights = tuple(params.get("d_weights", (0.2, 0.2)))
    noise = params.get("noise", 0.05)
    return studies.two_machine_filter_design(p, d_weights=d_weights, noise=noise), p


def _run_filter_design(params, outdir, grid):
    design, p = _filter_design(params)
    resp = freq_response(design.F, grid)
    write_csv(os.path.join(outdir, "filter_F.csv"), ("omega", "mag", "phase_deg"),
              bode_rows(grid.omegas, resp))
    write_json(os.path.join(outdir, "filter_F.json"), design.F.to_json())
    summary = {"closed_loop_norm": design.closed_loop_norm,
               "weights": design.weights,
               "filter_order": design.F_ss.n_states,
               "strictly_proper": design.F.is_strictly_proper()}
    return ["filter_F.csv", "filter_F.json"], summary, {}


def _run_feedback_analysis(params, outdir, grid):
    design, p = _filter_design(params)
    Kz = params.get("Kz", 0.5)
    st = studies.two_machine_feedback_study(design, Kz=Kz, params=p, grid=grid)
    files = []
    curves = {"P1": st.P_curves[0], "P2": st.P_curves[1],
              "Rzd1": st.R_curves[0], "Rzd2": st.R_curves[1]}
    for name, vals in sorted(curves.items()):
        fn = f"curve_{name}.csv"
        write_csv(os.path.join(outdir, fn), ("omega", "mag", "phase_deg"),
                  bode_rows(grid.omegas, vals))
        files.append(fn)
    band_p = attenuation_band([("P1", st.P_curves[0]), ("P2", st.P_curves[1])], grid)
    band_r = attenuation_band([("R1", st.R_curves[0]), ("R2", st.R_curves[1])], grid)
    q1, q2 = st.q_band
    summary = {"Kz": Kz, "q1": q1, "q2": q2,
               "attenuation_band_P": list(band_p) if band_p else None,
               "attenuation_band_R": list(band_r) if band_r else None}
    return files, summary, {"band": [q1, q2]}


def _run_modal(params, outdir, grid):
    study = _get_study()
    md = decompose(study.lin.A)
    rows = []
    for lam in md.lambdas:
        rows.append((lam.real, lam.imag,
                     damping_ratio(lam) if lam != 0 else ""))
    write_csv(os.path.join(outdir, "eigenvalues.csv"),
              ("re", "im", "zeta"), rows)
    shape_rows = [(lbl, c.real, c.imag, abs(c), float(np.degrees(np.angle(c))))
                  for lbl, c in zip(("G1", "G2", "G3", "G4"),
                                    study.mode_components)]
    write_csv(os.path.join(outdir, "mode_shape.csv"),
              ("machine", "re", "im", "mag", "phase_deg"), shape_rows)
    summary = {"omega1": study.omega1, "f1_hz": study.omega1 / (2 * np.pi),
               "zeta_open": study.zeta_open}
    return ["eigenvalues.csv", "mode_shape.csv"], summary, {}


def _run_synthesize(params, outdir, grid):
    study = _get_study()
    name = params["design"]
    design = _get_design(name, study)
    write_json(os.path.join(outdir, f"controller_{name}.json"),
               design.controller.to_json())
    summary = dict(design.report)
    summary["zeta_open"] = study.zeta_open
    write_json(os.path.join(outdir, f"design_report_{name}.json"), summary)
    return [f"controller_{name}.json", f"design_report_{name}.json"], summary, {}


def _run_simulate(params, outdir, grid):
    study = _get_study()
    name = params.get("design", "open_loop")
    controllers = ()
    if name != "open_loop":
        controllers = (_get_design(name, study).loop(),)
    dist = [Disturbance(bus=d["bus"], delta_P=d["delta_P"], t_start=d["t_start"],
                        duration=d["duration"]) for d in params["disturbances"]]
    traj = simulate(study.model, controllers, dist,
                    dt=params.get("dt", 0.005), t_end=params.get("t_end", 12.0),
                    op=study.op)
    files = [_write_trajectory(outdir, "trajectory", traj)]
    files.append("trajectory_meta.json")
    summary = {"separated": traj.separated,
               "t_end": traj.metadata["t_end"],
               "peak_delta_1_4_rad": float(np.max(traj.signals["delta_1"]
                                                  - traj.signals["delta_4"]))}
    return files, summary, {}


def _write_trajectory(outdir, stem, traj):
    names = sorted(traj.signals)
    header = ["t"] + names
    rows = []
    for i in range(traj.time.size):
        rows.append([traj.time[i]] + [traj.signals[n][i] for n in names])
    fn = f"{stem}.csv"
    write_csv(os.path.join(outdir, fn), header, rows)
    write_json(os.path.join(outdir, f"{stem}_meta.json"), traj.metadata)
    return fn


def _run_linearize(params, outdir, grid):
    study = _get_study()
    lin = study.lin
    write_json(os.path.join(outdir, "linearization.json"), lin.to_json())
    ev = poles(lin)
    write_csv(os.path.join(outdir, "eigenvalues.csv"), ("re", "im"),
              [(l.real, l.imag) for l in ev])
    summary = {"n_states": lin.n_states, "omega1": study.omega1,
               "zeta_open": study.zeta_open}
    return ["linearization.json", "eigenvalues.csv"], summary, {}


_RUNNERS = {
    "two_machine_analysis": _run_two_machine_analysis,
    "filter_design": _run_filter_design,
    "feedback_analysis": _run_feedback_analysis,
    "modal": _run_modal,
    "synthesize": _run_synthesize,
    "simulate": _run_simulate,
    "linearize": _run_linearize,
}


def run_config(config, outdir=None):
    """Validate and execute a scenario config; returns the manifest path."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    _validate(config)
    outdir = outdir or config["outputs"]
    os.makedirs(outdir, exist_ok=True)
    grid = default_grid(config.get("grid"))
    files, summary, annotations = _RUNNERS[config["kind"]](config["parameters"],
                                                           outdir, grid)
    return write_manifest(outdir, config["kind"], files, summary=summary,
                          annotations=annotations,
                          parameters=config["parameters"])


# ---------------------------------------------------------------------------
# figure analogs
# ---------------------------------------------------------------------------

def _cplx_list(vals):
    return [[v.real, v.imag] for v in vals]


def _fig4(outdir, grid):
    """Filtering-limitation Bode: Gyd_i/Gzd_i ratios of the benchmark."""
    p = studies.example_two_machine()
    undamped = studies.example_two_machine(damped=False)
    tfs = performance_tfs(undamped)
    q1, q2 = zero_frequencies(undamped)
    files, plots = [], {}
    discrepancy = {}
    ss = build_state_space(p, include_relative_speed=True)
    for i in (1, 2):
        ratio_u = (tfs[f"Gyd{i}"] / tfs[f"Gzd{i}"]).simplify()
        g = _offset(grid, ratio_u)
        resp_u = freq_response(ratio_u, g)
        fn = f"fig4_ratio_d{i}.csv"
        write_csv(os.path.join(outdir, fn), ("omega", "mag", "phase_deg"),
                  bode_rows(grid.omegas, resp_u))
        files.append(fn)
        plots[fn] = {"kind": "bode", "x": "omega", "mag": "mag",
                     "phase": "phase_deg"}
        # damped state-space variant for the discrepancy report; relative
        # differences are meaningless at the notch, so compare off-notch
        gyd = ss_to_tf(ss, i - 1, ss.output_index("theta"))
        gzd = ss_to_tf(ss, i - 1, ss.output_index("z"))
        ratio_d = (gyd / gzd).simplify()
        resp_d = freq_response(ratio_d, g)
        off_notch = np.abs(resp_u) > 0.05 * np.max(np.abs(resp_u))
        rel = np.max(np.abs(resp_d - resp_u)[off_notch]
                     / np.abs(resp_u)[off_notch])
        discrepancy[f"d{i}_max_rel_diff_damped_vs_undamped_off_notch"] = float(rel)
    summary = {"q1": q1, "q2": q2, **discrepancy}
    return files, summary, {"band": [q1, q2]}, plots


def _fig5like(outdir, grid):
    """Mode-estimation filter design report (block-diagram analog)."""
    design = studies.two_machine_filter_design()
    resp = freq_response(design.F, grid)
    write_csv(os.path.join(outdir, "fig5_filter_F.csv"),
              ("omega", "mag", "phase_deg"), bode_rows(grid.omegas, resp))
    write_json(os.path.join(outdir, "fig5_filter_F.json"), design.F.to_json())
    summary = {"closed_loop_norm": design.closed_loop_norm,
               "weights": design.weights,
               "strictly_proper": design.F.is_strictly_proper()}
    plots = {"fig5_filter_F.csv": {"kind": "bode", "x": "omega", "mag": "mag",
                                   "phase": "phase_deg"}}
    return ["fig5_filter_F.csv", "fig5_filter_F.json"], summary, {}, plots


def _fig6(outdir, grid):
    """Filtering sensitivities and disturbance response ratios with bands."""
    st = studies.two_machine_feedback_study(grid=grid)
    q1, q2 = st.q_band
    curves = {"P1": st.P_curves[0], "P2": st.P_curves[1],
              "Rzd1": st.R_curves[0], "Rzd2": st.R_curves[1]}
    files, plots = [], {}
    for name in ("P1", "P2", "Rzd1", "Rzd2"):
        fn = f"fig6_{name}.csv"
        write_csv(os.path.join(outdir, fn), ("omega", "mag", "phase_deg"),
                  bode_rows(grid.omegas, curves[name]))
        files.append(fn)
        plots[fn] = {"kind": "bode", "x": "omega", "mag": "mag",
                     "phase": "phase_deg", "band": [q1, q2]}
    band_p = attenuation_band([("P1", st.P_curves[0]), ("P2", st.P_curves[1])], grid)
    band_r = attenuation_band([("R1", st.R_curves[0]), ("R2", st.R_curves[1])], grid)

    def sup_outside(pair, band):
        w = grid.omegas
        worst = np.maximum(np.abs(pair[0]), np.abs(pair[1]))
        mask = (w < band[0]) | (w > band[1])
        return float(np.max(worst[mask]))

    summary = {
        "q1": q1, "q2": q2,
        "attenuation_band_P": list(band_p) if band_p else None,
        "attenuation_band_R": list(band_r) if band_r else None,
        "band_P_inside_q_window": bool(band_p and q1 < band_p[0] and band_p[1] < q2),
        "band_R_inside_q_window": bool(band_r and q1 < band_r[0] and band_r[1] < q2),
        "sup_outside_P": sup_outside(st.P_curves, band_p),
        "sup_outside_R": sup_outside(st.R_curves, band_r),
    }
    return files, summary, {"band": [q1, q2]}, plots


def _fig7(outdir, grid):
    """Mode speed z and estimate zhat after 0.2 pu load steps."""
    design = studies.two_machine_filter_design()
    p = studies.example_two_machine()
    ss = build_state_space(p, include_relative_speed=True)
    F = design.F_ss
    t = np.arange(0, 20.0 + 1e-9, 0.01)
    files, plots = [], {}
    signs = {}
    for i, dname in ((0, "d1"), (1, "d2")):
        u = np.zeros((t.size, 3))
        u[:, i] = 0.2
        sys = scipy.signal.StateSpace(ss.A, ss.B, ss.C, ss.D)
        _, y, _ = scipy.signal.lsim(sys, u, t)
        z = y[:, ss.output_index("z")]
        theta = y[:, ss.output_index("theta")]
        fsys = scipy.signal.StateSpace(F.A, F.B, F.C, F.D)
        _, zhat, _ = scipy.signal.lsim(fsys, theta.reshape(-1, 1), t)
        zhat = np.asarray(zhat).ravel()
        fn = f"fig7_{dname}.csv"
        write_csv(os.path.join(outdir, fn), ("t", "z", "zhat"),
                  list(zip(t, z, zhat)))
        files.append(fn)
        plots[fn] = {"kind": "timeseries", "x": "t", "y": ["z", "zhat"]}
        # sign agreement during the initial transient (first quarter period)
        horizon = t <= (2 * np.pi / 1.0) / 4
        zi = z[horizon]
        zhi = zhat[horizon]
        k = np.argmax(np.abs(zi) > 0.2 * np.max(np.abs(zi)))
        agree = bool(np.sign(zhi[k]) == np.sign(zi[k]) and zhi[k] != 0)
        signs[dname] = agree
    summary = {"initial_sign_match": signs,
               "favored_only_one": bool(signs["d1"] != signs["d2"])}
    return files, summary, {}, plots


def _fig11(outdir, grid):
    study = _get_study()
    rows = [(lbl, c.real, c.imag, abs(c), float(np.degrees(np.angle(c))))
            for lbl, c in zip(("G1", "G2", "G3", "G4"), study.mode_components)]
    write_csv(os.path.join(outdir, "fig11_mode_shape.csv"),
              ("machine", "re", "im", "mag", "phase_deg"), rows)
    area1 = [study.mode_components[0].real, study.mode_components[1].real]
    area2 = [study.mode_components[2].real, study.mode_components[3].real]
    summary = {"omega1": study.omega1, "zeta_open": study.zeta_open,
               "areas_opposite": bool(min(area1) > 0 > max(area2)
                                      or max(area1) < 0 < min(area2))}
    plots = {"fig11_mode_shape.csv": {"kind": "compass"}}
    return ["fig11_mode_shape.csv"], summary, {}, plots


def _fig12(outdir, grid):
    study = _get_study()
    design, locus, zetas, gains = studies.design_pss(study)
    branch = locus.track(study.lam1)
    rows = []
    for gi, g in enumerate(locus.gains):
        for pi, lam in enumerate(locus.pole_sets[gi]):
            zeta = damping_ratio(lam) if lam != 0 else ""
            rows.append((g, pi, lam.real, lam.imag, zeta))
    write_csv(os.path.join(outdir, "fig12_root_locus.csv"),
              ("gain", "pole_idx", "re", "im", "zeta"), rows)
    branch_rows = [(g, lam.real, lam.imag, float(-lam.real / abs(lam)))
                   for g, lam in zip(locus.gains, branch)]
    write_csv(os.path.join(outdir, "fig12_interarea_branch.csv"),
              ("gain", "re", "im", "zeta"), branch_rows)
    cross = next((i for i, z in enumerate(zetas) if z >= design.report["target"]),
                 None)
    summary = {"k_pss": design.report["k_pss"], "T1": design.report["T1"],
               "T2": design.report["T2"],
               "zeta_crossing_gain_index": cross,
               "achieved_zeta": design.zeta,
               "monotone_to_crossing": bool(all(zetas[i + 1] > zetas[i] - 1e-12
                                                for i in range(cross or 0)))}
    plots = {"fig12_root_locus.csv": {"kind": "rootlocus",
                                      "zeta_rays": [0.05, 0.10]}}
    return ["fig12_root_locus.csv", "fig12_interarea_branch.csv"], summary, {}, plots


def _transient_figure(outdir, tag, design):
    """Shared body of the transient-contrast figures (14, 16, 17, 18)."""
    study = _get_study()
    open_pk = studies.first_swing_peaks(study)
    pk = studies.first_swing_peaks(study, design)
    files, plots = [], {}
    for name, dist in studies.PULSES.items():
        traj = simulate(study.model, (design.loop(),), [dist], dt=0.005,
                        t_end=12.0, op=study.op)
        rows = list(zip(traj.time,
                        np.degrees(traj.signals["delta_1"] - traj.signals["delta_4"]),
                        traj.signals["hvdc_u"]))
        fn = f"{tag}_{name}.csv"
        write_csv(os.path.join(outdir, fn), ("t", "angle_1_4_deg", "u_mw"), rows)
        files.append(fn)
        plots[fn] = {"kind": "timeseries", "x": "t",
                     "y": ["angle_1_4_deg", "u_mw"],
                     "disturbance_window": [dist.t_start,
                                            dist.t_start + dist.duration],
                     "saturation_mw": study.model.hvdc.limit}
    summary = {
        "zeta_open": study.zeta_open,
        "achieved_zeta": design.zeta,
        "near_peak_open_rad": open_pk["near"]["peak_rad"],
        "far_peak_open_rad": open_pk["far"]["peak_rad"],
        "near_peak_closed_rad": pk["near"]["peak_rad"],
        "far_peak_closed_rad": pk["far"]["peak_rad"],
        "near_peak_closed < near_peak_open":
            bool(pk["near"]["peak_rad"] < open_pk["near"]["peak_rad"]),
        "far_peak_closed > far_peak_open":
            bool(pk["far"]["peak_rad"] > open_pk["far"]["peak_rad"]),
        "separated": bool(pk["near"]["separated"] or pk["far"]["separated"]),
        "both_within_2pct":
            bool(pk["near"]["peak_rad"] <= 1.02 * open_pk["near"]["peak_rad"]
                 and pk["far"]["peak_rad"] <= 1.02 * open_pk["far"]["peak_rad"]
                 and not pk["near"]["separated"] and not pk["far"]["separated"]),
    }
    return files, summary, plots


def _fig14(outdir, grid):
    study = _get_study()
    design = _get_design("pss", study)
    files, summary, plots = _transient_figure(outdir, "fig14_pss", design)
    return files, summary, {}, plots


def _fig15(outdir, grid):
    study = _get_study()
    design = _get_design("theta9", study)
    write_json(os.path.join(outdir, "fig15_design_report.json"),
               dict(design.report, zeta_open=study.zeta_open))
    write_json(os.path.join(outdir, "fig15_controller.json"),
               design.controller.to_json())
    return (["fig15_design_report.json", "fig15_controller.json"],
            dict(design.report), {}, {})


def _fig16(outdir, grid):
    study = _get_study()
    design = _get_design("theta9", study)
    files, summary, plots = _transient_figure(outdir, "fig16_h2", design)
    return files, summary, {}, plots


def _fig17(outdir, grid):
    study = _get_study()
    design = _get_design("wams", study)
    files, summary, plots = _transient_figure(outdir, "fig17_wams", design)
    summary["both_peaks_reduced_or_within_2pct"] = summary["both_within_2pct"]
    return files, summary, {}, plots


def _fig18(outdir, grid):
    study = _get_study()
    all_files, plots = [], {}
    summary = {}
    for name in ("line_P", "V9"):
        design = _get_design(name, study)
        files, s, pl = _transient_figure(outdir, f"fig18_{name}", design)
        all_files.extend(files)
        plots.update(pl)
        summary[name] = s
    summary["neither_amplified_beyond_2pct"] = bool(
        summary["line_P"]["both_within_2pct"] and summary["V9"]["both_within_2pct"])
    return all_files, summary, {}, plots


FIGURES = {
    "fig4": _fig4,
    "fig5like": _fig5like,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig11": _fig11,
    "fig12": _fig12,
    "fig14": _fig14,
    "fig15": _fig15,
    "fig16": _fig16,
    "fig17": _fig17,
    "fig18": _fig18,
}


def repro(figure_id, outdir, grid=None):
    """Produce the CSV/JSON artifacts for one paper-figure analog."""
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure id {figure_id!r}; "
                          f"choose from {sorted(FIGURES)}")
    os.makedirs(outdir, exist_ok=True)
    grid = grid or FrequencyGrid.log_spaced(1e-2, 1e2, 400)
    files, summary, annotations, plots = FIGURES[figure_id](outdir, grid)
    return write_manifest(outdir, figure_id, files, summary=summary,
                          annotations=annotations, plots=plots)
