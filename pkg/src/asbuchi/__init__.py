"""Almost-sure generalized Büchi games: explicit finite arenas and symbolic
lossy-channel-system games over regular regions."""

__version__ = "0.1.0"
