"""Squeezed and cat states of a charged mechanical oscillator driven by a stream of Rydberg atoms."""

__version__ = "0.1.0"
