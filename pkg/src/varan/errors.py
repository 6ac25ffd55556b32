"""Exception types shared across the toolkit."""


class VaranError(Exception):
    """Base class for all toolkit errors."""


class RegistryError(VaranError):
    """Unknown corpus entry or bad entry parameters."""


class ConfigError(VaranError):
    """Malformed run configuration (bad key, type, or section)."""


class AnchorInfeasibleError(VaranError):
    """An operation was anchored at a point where f is not finite."""


class ProxUnboundedError(VaranError):
    """The proximal objective decreases toward the search-box boundary."""


class NonDifferentiablePointError(VaranError):
    """The Moreau envelope is not differentiable at the requested point
    (proximal mapping is multivalued there)."""


class AttentivePathDivergenceError(VaranError):
    """Tail of an envelope-sampled subgradient path failed to converge
    to the requested anchor pair."""


class ImproperOnBoxError(VaranError):
    """The function is identically +inf on the sampled box."""


class PreconditionError(VaranError):
    """A documented operation precondition failed; message carries a witness."""


class NotQuadraticError(VaranError):
    """Sampled second-order data is not a generalized quadratic form.

    Carries a machine-readable reason: 'asymmetric-finiteness',
    'not-a-subspace', or 'residual'.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class SingularFormError(VaranError):
    """Matrix argument violates a positive-definiteness precondition."""


class EnvelopeUnboundedError(VaranError):
    """Quadratic-form envelope objective is unbounded below for this lambda."""


class EmptyBundleError(VaranError):
    """No bundle member survived sampling and clustering."""


class LipschitzFailureError(VaranError):
    """Empirical Lipschitz estimation diverged (argmin map not single-valued
    or ratios unbounded)."""


class CriterionFailure(VaranError):
    """An acceptance criterion failed; message carries the measured values."""


class ReportError(VaranError):
    """A report payload contains an unserializable value or a CSV file
    does not match the documented schema."""
