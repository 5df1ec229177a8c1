"""Isotropic measures on contact points and the r-flow towards John's theorem."""
from .body import HPolytope, PNormBall, UnitBall, VPolytope, body_from_json, transform
from .errors import JohnForgeError
from .flow import FlowResult, I1_sphere, Ir_eval, Lr_eval, minimize_Lr, stationarity_residual
from .isotropic import IsotropicMeasure, extract_weights, verify_john
from .loewner import ContactSet, Ellipsoid, contact_points, mvee, to_loewner
from .minimize import MinimizeConfig, minimize_Ic
from .objective import DiscreteMeasureProblem, get_F, solvability_check
from .symspace import SymPair

__version__ = "0.1.0"
