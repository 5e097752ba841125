"""Planning toolkit for high-density automated parking garages."""

__version__ = "0.1.0"
