"""pinchlab: numerical experiments with geometrically finite rational maps."""
from .sphere import RationalMap, SpherePoint, chordal_distance, critical_points, derivative, eval_map, iterate

__all__ = [
    "RationalMap",
    "SpherePoint",
    "chordal_distance",
    "critical_points",
    "derivative",
    "eval_map",
    "iterate",
]
__version__ = "0.1.0"
