"""qoesim: seeded simulator and policy library for QoE-centric tool routing."""

__version__ = "0.1.0"
