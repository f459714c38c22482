"""Out-of-distribution detection scoring and evaluation toolkit.

Scores follow one convention everywhere: higher means more in-distribution.
"""

__version__ = "0.1.0"
