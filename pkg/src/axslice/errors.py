"""Exception types shared across the package."""


class AxsliceError(Exception):
    """Base class for all package errors."""


class ModelError(AxsliceError):
    """Malformed model file: bad JSON, bad dimensions, bad activations."""


class InstanceError(AxsliceError):
    """Malformed or out-of-domain instance data."""


class LpBreakdownError(AxsliceError):
    """Numerical breakdown inside the simplex, distinct from infeasibility."""


class EngineError(AxsliceError):
    """Branch-and-bound misuse or an unbounded mixed program."""


class CapacityError(AxsliceError):
    """Exhaustive verifier asked to enumerate more neurons than its cap."""


class PlanError(AxsliceError):
    """Invalid slicing request."""


class DegenerateFeatureError(PlanError):
    """Slicing requested on a feature whose interval has zero width."""


class TooManySlicesError(PlanError):
    """More sliced features requested than the supported maximum."""


class NotEnoughFeaturesError(PlanError):
    """Random feature draw has fewer candidates than requested."""


class TiePredictionError(AxsliceError):
    """Instance whose top two outputs tie; strict entailment is impossible."""


class InconclusiveError(AxsliceError):
    """A required entailment check hit its node or time budget."""
