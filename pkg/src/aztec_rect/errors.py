"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical routine failed its internal accuracy certification.

    Raised by root solvers whose residual exceeds the certified bound, by
    quadratures whose resolutions disagree, and by analytic-branch tracking
    when continuity is lost.
    """


class GuardError(RuntimeError):
    """A combinatorial guard was exceeded (e.g. enumeration of a domain
    with too many tilings).  The operation refuses rather than running
    unbounded."""
