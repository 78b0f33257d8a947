"""PAC one-step safety certification for black-box stochastic systems."""
__version__ = "0.1.0"
