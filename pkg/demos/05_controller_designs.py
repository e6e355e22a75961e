"""Controller designs for the desk model: PSS lead-lag and H2 variants."""

import numpy as np

from podlim.studies import (design_bus_voltage, design_line_power, design_pss,
                            design_theta9, design_wams, desk_study)

study = desk_study()
print(f"open-loop inter-area damping: {study.zeta_open:.3f} "
      f"at {study.omega1/2/np.pi:.3f} Hz\n")

pss, locus, zetas, gains = design_pss(study)
print("== PSS-style lead-lag on theta9 ==")
print(f"  k_pss={pss.report['k_pss']:.2f} T1={pss.report['T1']:.4f} "
      f"T2={pss.report['T2']:.4f}  -> zeta={pss.zeta:.3f}")
print(f"  locus damping grows monotonically: "
      f"{zetas[0]:.3f} -> {zetas[min(len(zetas)-1, 30)]:.3f} over the gain sweep")

for builder, label in ((design_theta9, "H2 on washed theta9"),
                       (design_wams, "H2 on theta9 + delayed omega1 (WAMS)"),
                       (design_line_power, "H2 on line power 8-9"),
                       (design_bus_voltage, "H2 on V9")):
    d = builder(study)
    extra = ""
    if d.report.get("damping_ceiling"):
        extra = f" (ceiling {d.report['damping_ceiling']:.3f} in this model class)"
    print(f"== {label} ==")
    print(f"  order {d.controller.n_states}, achieved zeta {d.zeta:.3f}"
          f" (target {d.report['target']}){extra}")
