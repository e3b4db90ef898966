"""Agent-based market simulator for a binary-expectation decision model
under equilibrium pricing and under a limit order book."""

__version__ = "0.1.0"
