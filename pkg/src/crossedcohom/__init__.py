"""Nonabelian cohomology with coefficients in sheaves of crossed groups over finite sites."""

from .action import ActionSheaf, contracted_product, extend_group, is_torsor, torsor_classes
from .cohomology import (
    coboundary1,
    coboundary2,
    h0,
    h1,
    map_h1,
    verify_exact_h2,
    verify_functoriality,
    verify_low_exactness,
    verify_naturality,
)
from .compare import abelian_cech_h1, abelian_cech_h2, cech_h1, compare_abelian, giraud_correspondence
from .crossed import CrossedGroupSheaf, CrossedMorphism, ShortExactCrossedSeq, abelian_crossed, check_crossed, int_crossed
from .gerbes import (
    CoboundaryData,
    Cocycle2,
    H2Class,
    apply_coboundary,
    cocycles_equivalent,
    h2_classes,
    is_neutral,
    map_h2,
)
from .groups import FiniteGroup, cyclic, symmetric
from .report import BoundExceeded, Report
from .sheaf import Presheaf, check_sheaf, constant_sheaf, sheafify
from .site import Cover, FiniteSite, build_poset_site, point_site, pseudo_circle, sphere2, validate_site

__version__ = "0.1.0"
