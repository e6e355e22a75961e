"""Closing the estimate-feedback loop: attenuation bands and their repayment.

Builds the 0.5 pu/(rad/s) estimate-feedback controller on the benchmark and
shows that disturbance attenuation only happens inside the zero window, with
amplification above 1 outside it for at least one disturbance direction.
"""

import numpy as np

from podlim.sensitivity import attenuation_band
from podlim.studies import two_machine_feedback_study

st = two_machine_feedback_study()
q1, q2 = st.q_band
grid = st.grid

print("== estimate feedback with Kz = 0.5 pu/(rad/s) ==")
print(f"zero window (|q1|, |q2|) = ({q1:.4f}, {q2:.4f}) rad/s")

band_p = attenuation_band([("P1", st.P_curves[0]), ("P2", st.P_curves[1])], grid)
band_r = attenuation_band([("R1", st.R_curves[0]), ("R2", st.R_curves[1])], grid)
print(f"filtering band (both |P_i| < 1): {band_p[0]:.4f} .. {band_p[1]:.4f}")
print(f"feedback band (both |R_i| < 1):  {band_r[0]:.4f} .. {band_r[1]:.4f}")
print("both lie strictly inside the zero window, as the interpolation")
print("constraints require.")

w = grid.omegas
for label, curves, band in (("P", st.P_curves, band_p), ("R", st.R_curves, band_r)):
    worst = np.maximum(np.abs(curves[0]), np.abs(curves[1]))
    outside = (w < band[0]) | (w > band[1])
    print(f"sup of max|{label}1|,|{label}2| outside the band: "
          f"{np.max(worst[outside]):.3f}  (> 1: the water bed collects)")
