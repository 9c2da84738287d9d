"""Minimal JSIM-style transient simulator for superconducting cells."""

from .margins import MarginError, margin_scan
from .netlist import (
    CurrentSource,
    Dc,
    Inductor,
    Junction,
    Mutual,
    Netlist,
    NetlistError,
    Pulse,
    PulseTrain,
    Resistor,
    Sine,
    VoltageSource,
    critical_damping_cap,
    default_rn,
    parse_netlist,
    parse_value,
)
from .pulses import detect_pulses, detect_pulses_in, flux_integrals, flux_through
from .transient import (
    CircuitError,
    NewtonError,
    TraceSet,
    run_transient,
    write_waveform_csv,
)

__all__ = [
    "CircuitError",
    "CurrentSource",
    "Dc",
    "Inductor",
    "Junction",
    "MarginError",
    "Mutual",
    "Netlist",
    "NetlistError",
    "NewtonError",
    "Pulse",
    "PulseTrain",
    "Resistor",
    "Sine",
    "TraceSet",
    "VoltageSource",
    "critical_damping_cap",
    "default_rn",
    "detect_pulses",
    "detect_pulses_in",
    "flux_integrals",
    "flux_through",
    "margin_scan",
    "parse_netlist",
    "parse_value",
    "run_transient",
    "write_waveform_csv",
]
