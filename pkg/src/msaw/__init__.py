"""Simulation and interrogation of dual-path Love-wave SAW magnetic field sensors."""

__version__ = "0.1.0"
