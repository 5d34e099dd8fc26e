"""Exact iterated residues, theta jets, Bott towers and toric forms."""

__version__ = "0.1.0"
