"""Desk-scale quarter-car braking simulator."""

from lossprobe.sim.vehicle import (
    G, SLIP_EPS, Inputs, ScenarioScript, Segment, Trace, VehicleParams, VehicleState,
    default_braking_script, friction_force, kinetic_energy, simulate, slip_ratio, step,
)

__all__ = [
    "G", "SLIP_EPS", "Inputs", "ScenarioScript", "Segment", "Trace", "VehicleParams",
    "VehicleState", "default_braking_script", "friction_force", "kinetic_energy",
    "simulate", "slip_ratio", "step",
]
