"""Error budgets and scaling estimates for neutral-atom qubits in optical lattices."""

__version__ = "0.1.0"
