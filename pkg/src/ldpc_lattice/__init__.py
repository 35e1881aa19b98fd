"""Construction-A LDPC lattices with shaping and decode-and-forward relay simulation."""

__version__ = "0.1.0"
