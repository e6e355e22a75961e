"""Shared model builders for the test suite."""

from podlim.gridsim import Bus, GridModel, Machine


def star_two_machine(M=2.0, D=0.0, X1=0.1, X2=0.9):
    """Two machines joined at one control bus through their reactances."""
    return GridModel(
        buses=(Bus(1),),
        lines=(),
        machines=(Machine(bus=1, M=M, D=D, Xd_prime=X1, P_mech=0.0, Vset=1.0),
                  Machine(bus=1, M=M, D=D, Xd_prime=X2, P_mech=0.0, Vset=1.0)),
        hvdc=None, system_base=1.0)
