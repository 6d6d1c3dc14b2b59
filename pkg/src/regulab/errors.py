"""Exception types shared across the library."""


class RegulabError(Exception):
    """Base class for all library errors."""


class DegenerateLine(RegulabError):
    """The SL2 reparameterization chart does not cover this line."""


class DegenerateHeight(RegulabError):
    """A formula singular at t=0 was evaluated too close to it."""


class DegenerateCurve(RegulabError):
    """A curve-system operation hit a vanishing denominator."""


class BadScale(RegulabError):
    """delta too coarse for the requested construction."""


class GenerationExhausted(RegulabError):
    """Rejection sampling gave up; the box is too crowded at this delta."""


class GridTooLarge(RegulabError):
    """Voxel budget exceeded; coarsen the resolution or use Monte Carlo."""


class InsufficientSamples(RegulabError):
    """Monte Carlo standard error too large at the decision boundary."""


class InsufficientData(RegulabError):
    """Not enough usable rows for a fit."""


class ZeroFunction(RegulabError):
    """An Lp ratio was requested for an identically-zero function."""


class ConfigError(RegulabError):
    """Malformed experiment configuration or input file."""


class InvariantFailure(RegulabError):
    """A per-run invariant check failed; the first failing check is named."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)
