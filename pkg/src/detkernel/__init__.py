"""Character expansions of determinant kernels on U(n), O(2n) and Sp(n)."""

__version__ = "0.1.0"
