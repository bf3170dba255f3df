"""Shared exception types.

CompositeSignal is the load-bearing one: every stage of the construction
doubles as a primality test, and any arithmetic step that can only fail
over a composite modulus raises it, carrying an exposed factor when one
is available.
"""


class DomainError(ValueError):
    """Input outside an operation's stated precondition."""


class ResourceError(RuntimeError):
    """Input exceeds a configured desk-scale bound."""


class NotASquare(ValueError):
    """Square root requested for a quadratic non-residue."""


class CompositeSignal(Exception):
    """Evidence that a modulus believed prime is composite.

    factor is a nontrivial divisor when the failure exposed one (gcd
    witness); stage names the computation that tripped.
    """

    def __init__(self, modulus, factor=None, stage=""):
        self.modulus = modulus
        self.factor = factor
        self.stage = stage
        msg = f"composite modulus detected at {stage or 'unknown stage'}"
        if factor not in (None, 0):
            msg += f" (factor {factor})"
        super().__init__(msg)


class VerificationFailure(Exception):
    """A consistency check that should hold for honest inputs failed."""


class VolcanoError(Exception):
    """Isogeny orbit walk did not produce the expected surface orbit."""
