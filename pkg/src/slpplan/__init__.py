"""slpplan: spatial-domain sequential-linear-programming trajectory planner
for automated vehicles, with footprint constraints, a clothoid baseline, and
friction-limited speed bounds."""

__version__ = "0.1.0"
