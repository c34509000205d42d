"""Novelty-search GA for tuning simulated drug-delivery nanorobots."""
from novabot.kernels import BACKEND

__version__ = "0.1.0"
