"""Group-decision engine: permissible-range analysis, compromise-order
search, and the facilitation process around them."""

from .model import (
    Ballot,
    Choice,
    Participant,
    Profile,
    ProfileError,
    ValidatedProfile,
    Weights,
    apply_rule,
    inversion_count,
    kendall_distance,
    load_profile,
    validate_profile,
)

__all__ = [
    "Ballot",
    "Choice",
    "Participant",
    "Profile",
    "ProfileError",
    "ValidatedProfile",
    "Weights",
    "apply_rule",
    "inversion_count",
    "kendall_distance",
    "load_profile",
    "validate_profile",
]

__version__ = "0.1.0"
