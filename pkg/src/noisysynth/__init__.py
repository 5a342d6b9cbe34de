"""Program synthesis from noisy input/output examples with weighted tree automata."""

__version__ = "0.1.0"
