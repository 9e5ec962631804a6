"""Storage backends for run outputs and the system cache."""
