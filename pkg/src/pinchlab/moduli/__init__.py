"""Conformal modulus: closed forms, raster estimator, modulus inequalities."""
from .closed_forms import (LEMMA21_LOSS, disk_pair_modulus, kappa, nested_disk_modulus, round_modulus,
                           two_disk_modulus)
from .grid import SANDWICH_STATS, GridMetric, ModulusEstimate, grid_modulus
from .lemmas import (QuadAnnulusReport, RoundAnnulusReport, ThreeQuadReport, extract_round_annulus,
                     read_polylines, round_annulus_report, verify_quad_annulus_inequality,
                     verify_three_quadrilateral_inequality, write_polylines)
from .regions import AnnulusRegion, PolygonQuad, Quadrilateral, RectQuad, SectorQuad

__all__ = [
    "LEMMA21_LOSS", "disk_pair_modulus", "kappa", "nested_disk_modulus", "round_modulus", "two_disk_modulus",
    "SANDWICH_STATS", "GridMetric", "ModulusEstimate", "grid_modulus",
    "QuadAnnulusReport", "RoundAnnulusReport", "ThreeQuadReport", "extract_round_annulus", "read_polylines",
    "round_annulus_report", "verify_quad_annulus_inequality", "verify_three_quadrilateral_inequality",
    "write_polylines",
    "AnnulusRegion", "PolygonQuad", "Quadrilateral", "RectQuad", "SectorQuad",
]
