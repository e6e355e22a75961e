"""podlim: sensor-feedback limitation analysis for power oscillation damping.

Subpackages map onto the analysis chain: ``lti`` (representations and norms),
``two_machine`` (analytic benchmark), ``sensitivity`` (interpolation
constraints and water-bed integrals), ``modal`` (eigenstructure), ``synthesis``
(PSS and H2 design), ``gridsim`` (nonlinear multi-machine simulation), and
``cli``/``scenarios`` (declarative runs and figure-analog artifacts).
"""

from . import lti
from . import two_machine
from . import sensitivity
from . import modal
from . import synthesis
from . import gridsim
from . import studies

__version__ = "0.1.0"

__all__ = ["lti", "two_machine", "sensitivity", "modal", "synthesis",
           "gridsim", "studies"]
