"""Interior transmission eigenvalue census for radially symmetric media."""

__version__ = "0.1.0"
