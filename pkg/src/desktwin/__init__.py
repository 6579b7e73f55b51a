"""desktwin: interact once with an articulated object, rebuild it, then plan on the rebuild."""

__version__ = "0.1.0"
