"""Single-user M-ary bi-orthogonal Walsh signaling under narrowband interference."""

__version__ = "0.1.0"
