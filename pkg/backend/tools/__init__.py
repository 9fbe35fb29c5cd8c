# Exact (deterministic) and floating-point (numeric) tools
