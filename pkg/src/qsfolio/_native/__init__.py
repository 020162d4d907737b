"""Compiled kernels (optional; a NumPy fallback is used when absent)."""
