"""Core modules: mode lab, quantum state, homodyne engine, estimation, noise budget, scenarios."""
