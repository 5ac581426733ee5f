"""Simulation toolkit for a hybrid NV-spin / diamond-beam / microwave-cavity device.

Subpackages
-----------
quantum
    Composite Hilbert spaces, Lindblad propagation and state measures.
device
    Closed-form device formulas producing a :class:`~hybridsim.device.CouplingSet`.
cooling
    Second-order moment dynamics for sideband cooling of the beam.
interface
    Spin-mechanics-cavity dynamics: Rabi exchange, dark-polariton transfer,
    adiabatic-elimination effective model.
cli
    Configuration handling, scenario runner and regression harness.
"""

__version__ = "0.1.0"
