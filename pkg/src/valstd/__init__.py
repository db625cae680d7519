"""Cluster-aware standardization of variant string values.

Duplicate-record clusters often hold the same logical value in several
formats ("Lee, Mary" vs "M. Lee").  This package learns shared string
transformations between such values without supervision, batches them
into replacement groups for a human to approve or reject, applies the
approved groups, and derives per-cluster golden records by majority
consensus.
"""

__version__ = "0.1.0"
