"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``reason`` so the command line
front end can report it without parsing messages.
"""

from __future__ import annotations


class RowconError(Exception):
    """Base class of all library errors."""

    reason = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.reason)
        self.details = details


class ShapeMismatch(RowconError, ValueError):
    """Operands have incompatible dimensions."""

    reason = "shape_mismatch"


class NotPSD(RowconError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue
    below the tolerance."""

    reason = "not_psd"


class Singular(RowconError):
    """A matrix that must be invertible is numerically singular."""

    reason = "singular"


class NotPartialIsometry(RowconError):
    """A row operator is required to be a partial isometry but is not."""

    reason = "not_partial_isometry"


class SamplerExhausted(RowconError):
    """A sampled span was still growing when the point budget ran out."""

    reason = "sampler_exhausted"


class AlphaNotStrict(RowconError):
    """The centre of a ball automorphism is not a strict contraction."""

    reason = "alpha_not_strict"


class SingularDenominator(RowconError):
    """The denominator ``I - beta alpha^*`` of a ball automorphism is singular."""

    reason = "singular_denominator"


class Unital(RowconError):
    """``I - b(z)`` is singular, so the Herglotz transform is undefined."""

    reason = "unital"


class NotExtension(RowconError):
    """An operator does not extend the given partial isometry."""

    reason = "not_extension"


class DegenerateTriple(RowconError):
    """The model triple has a zero-dimensional output space."""

    reason = "degenerate_triple"


class IllConditioned(RowconError):
    """A matrix inversion exceeded the condition-number cap."""

    reason = "ill_conditioned"


class NotCCNC(RowconError):
    """The row contraction fails the commutative CNC condition."""

    reason = "not_ccnc"


class RankDeficientGrid(RowconError):
    """A sample grid spans too little to represent the requested map."""

    reason = "rank_deficient_grid"


class PreconditionUnmet(RowconError):
    """A probe's dimension precondition does not hold on the given data."""

    reason = "precondition_unmet"
