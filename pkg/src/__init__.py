"""
norden-lab: numerical verification engine for almost Norden manifolds.

Charts give g and J as expression matrices; jets of order two carry them to
connections, curvature and the statistical structures built from the Lie
forms, and the lab suites check each identity at sampled points.
"""
__version__ = "0.1.0"
