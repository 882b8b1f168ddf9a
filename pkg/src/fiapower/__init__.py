"""Data-plane power of IP, NDN, NEBULA and SCION routers and networks."""

__version__ = "0.1.0"
