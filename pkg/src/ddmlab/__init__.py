"""Desk-scale laboratory for dynamically defined measures on shift spaces."""

from .engine import (
    Cover,
    Horizon,
    NestedConstraint,
    alpha_entropy,
    constrained_minimum,
    cover_family,
    default_eps_ladder,
    hellinger_cross,
    hellinger_measure,
    log_moment,
    phi_reference,
    phi_shift_sequence,
    phi_truncated,
    relative_entropy,
)
from .certify import Bracket, CheckRecord, alpha_scan, phi_bracket
from .infokit import FiniteMeasurePair, quotient_sandwich, power_log_extrema, lambert_w0
from .markov import MarkovModel, WeightSpec, make_model
from .symbolic import (
    Cylinder,
    CylinderUnion,
    cylinder_union,
    empty_set,
    full_space,
    make_cylinder,
    parse_literal,
    preimage_shift,
    set_ops,
)

__version__ = "0.1.0"
