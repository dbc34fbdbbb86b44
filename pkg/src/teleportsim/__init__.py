"""Simulation and analysis toolkit for time-bin photon-to-memory teleportation.

Subpackages cover the full analytical chain of such an experiment:
state algebra and the heralded teleportation map (``timebin``),
photon-number statistics (``photon_stats``), two-photon interference and
the fidelity/QBER model (``interference``), atomic-frequency-comb memory
arithmetic (``afc``), state and process tomography (``tomography``),
classical and decoy-state fidelity bounds (``bounds``), repeater rate
planning (``repeater``), phase-drift sensitivities (``phase_drift``) and
the seeded end-to-end Monte Carlo (``pipeline``).  The ``cli`` module
exposes everything as the ``teleportsim`` command.
"""

__version__ = "0.1.0"
