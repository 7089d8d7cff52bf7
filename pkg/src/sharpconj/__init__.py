"""Sharp constants for trigonometrically conjugate classes W^r H_omega."""

__version__ = "0.1.0"
