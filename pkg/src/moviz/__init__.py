"""moviz: data-movement analysis for dataflow programs.

The package is organized bottom-up:

- :mod:`moviz.symbolic`   integer expression trees (parse, evaluate, substitute)
- :mod:`moviz.ir`         program representation, JSON format, validation
- :mod:`moviz.movement`   operation counts, logical movement, arithmetic intensity
- :mod:`moviz.heatmap`    adaptive color scaling for overlays
- :mod:`moviz.access_sim` iteration-space simulation and access traces
- :mod:`moviz.cache`      memory layout, cache lines, stack distances, misses
- :mod:`moviz.service`    analysis sessions, reports, and the HTTP API
- :mod:`moviz.cli`        command line front end
"""

__version__ = "0.1.0"
