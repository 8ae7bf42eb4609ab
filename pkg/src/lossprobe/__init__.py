"""lossprobe: mechanised STPA consistency checking and loss-scenario falsification."""

__version__ = "0.1.0"
