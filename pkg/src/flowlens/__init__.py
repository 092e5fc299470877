"""flowlens: mine a canonical progression from graded Python submissions.

The pipeline normalizes each submission into logical lines, embeds and
clusters them into variants and tags, mines the dominant step order from
passing submissions, labels line-level errors, and serves three linked
views (flow, histogram, detail) over HTTP for interactive filtering.
"""

__version__ = "0.1.0"
