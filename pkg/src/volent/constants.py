"""Numerical tolerances, collected in one place.

The hierarchy: construction-time checks are loosest (1e-9), geometric
predicates used downstream are tighter (1e-10), and ray-tracing step
guards sit at machine-noise scale.
"""

# Construction-time checks (polygon invariants: angles, edge lengths, area).
EPS_CONSTRUCT = 1e-9

# Geometric predicates (isometry round trips, point-on-geodesic checks).
EPS_GEOM = 1e-10

# Rejection radius around tessellation vertices during tracing.
EPS_VERTEX = 1e-9

# Minimal admissible advance of a traced ray, to skip the wall just crossed.
EPS_STEP = 1e-12

# Relative tolerance for spectral radius power iteration.
EPS_POWER = 1e-10

# Default bisection tolerance for entropy solves.
DEFAULT_H_TOL = 1e-4

# Default cap on enumerated chambers (keeps memory around 1 GB).
CHAMBER_CAP = 5_000_000
