"""Multi-band multi-user uplink receiver simulator.

Models receiver front-end noise figure and power budgets for eight
frequency-integrated / frequency-partitioned architectures and jointly
optimises combiners and per-user transmit power for sum spectral
efficiency.
"""

__version__ = "0.1.0"
