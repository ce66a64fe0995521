"""pinnforge: natural-language PDE tasks -> scored PINN training programs."""

__version__ = "0.1.0"
