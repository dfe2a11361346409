"""Z-covers of translation surfaces: exact flow, cylinders, strips and approximation."""

__version__ = "0.1.0"
