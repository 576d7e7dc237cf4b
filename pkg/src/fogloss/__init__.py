"""fogloss: asymptotic blocking probabilities of two cooperating loss systems
with overflow rerouting, via the explicit boundary-value solution of the
associated quarter-plane random walk, validated against brute-force oracles."""

__version__ = "0.1.0"
