"""Plan, simulate, and post-process autonomous surface vehicle river surveys."""

__version__ = "0.1.0"
