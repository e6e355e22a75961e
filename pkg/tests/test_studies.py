import numpy as np
import pytest

from podlim import studies
from podlim.gridsim import MeasurementSpec, linearize
from podlim.lti import closed_loop_matrix, poles
from podlim.synthesis import reduce_order


@pytest.fixture(scope="module")
def desk():
    return studies.desk_study()


def test_desk_study_mode_structure(desk):
    assert 0.4 <= desk.omega1 / (2 * np.pi) <= 0.8
    assert 0.0 < desk.zeta_open < 0.05
    comps = desk.mode_components.real
    assert min(comps[:2]) > 0 > max(comps[2:])  # area 1 against area 2


def test_filter_design_is_bounded_error_style(desk):
    design = studies.two_machine_filter_design()
    assert design.F.is_strictly_proper()
    assert np.max(design.F.poles().real) < 0


def test_feedback_study_water_bed(desk):
    st = studies.two_machine_feedback_study()
    w = st.grid.omegas
    worst_r = np.maximum(np.abs(st.R_curves[0]), np.abs(st.R_curves[1]))
    assert np.max(worst_r) > 1.0  # amplification somewhere is unavoidable


def test_theta9_deployment_matches_design_damping(desk):
    d9 = studies.design_theta9(desk)
    lin_abs = linearize(desk.model, load_buses=(), include_hvdc=True,
                        outputs=[MeasurementSpec("theta_bus", 9)], op=desk.op,
                        deflate_reference=False)
    ev = np.linalg.eigvals(closed_loop_matrix(lin_abs, d9.controller, 0, 0))
    osc = ev[ev.imag > 0.3]
    lam = osc[int(np.argmin(np.abs(osc - desk.lam1)))]
    zeta = -lam.real / abs(lam)
    # the deployed controller (wash-out prefilter on the raw absolute angle)
    # reproduces the design damping on the undeflated plant
    assert zeta == pytest.approx(d9.zeta, abs=1e-6)


def test_reduced_controller_keeps_damping(desk):
    d9 = studies.design_theta9(desk)
    lin_abs = linearize(desk.model, load_buses=(), include_hvdc=True,
                        outputs=[MeasurementSpec("theta_bus", 9)], op=desk.op,
                        deflate_reference=False)

    def zeta_of(K):
        ev = np.linalg.eigvals(closed_loop_matrix(lin_abs, K, 0, 0))
        osc = ev[ev.imag > 0.3]
        lam = osc[int(np.argmin(np.abs(osc - desk.lam1)))]
        return -lam.real / abs(lam)

    Kr = reduce_order(d9.controller, 4)
    assert Kr.n_states == 4
    assert np.max(poles(Kr).real) < 0
    assert abs(zeta_of(Kr) - zeta_of(d9.controller)) < 0.01  # within 1 point


def test_v9_design_reports_ceiling(desk):
    d = studies.design_bus_voltage(desk)
    # the classical desk model cannot reach the 10% angle-design target from
    # V9; the fallback records the achievable ceiling
    assert d.report["damping_ceiling"] is not None
    assert d.zeta > desk.zeta_open
