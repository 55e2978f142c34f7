"""Exception hierarchy shared across the package.

Exit-code mapping lives in the CLI; library code only raises these.
"""


class InputError(ValueError):
    """Malformed caller input: mixed fields, dimension mismatch, bad indices."""


class WidgetParseError(InputError):
    """Widget file rejected; message carries the element location."""


class ConfigError(ValueError):
    """Generator or census configuration that cannot be satisfied."""


class GenerationError(RuntimeError):
    """Rejection-sampling retry cap exceeded for a generator config."""


class ContractError(RuntimeError):
    """A documented operation precondition was violated by the caller."""


class FieldTooSmallError(RuntimeError):
    """Perturbation sweep exhausted every nonzero constant of GF(p).

    Only finite fields can run out of constants; the sweep over the
    rationals is guaranteed to terminate.
    """

    def __init__(self, p: int, tried: int):
        self.p = p
        self.tried = tried
        super().__init__(
            f"perturbation sweep exhausted GF({p}): all {tried} nonzero "
            f"constants rejected"
        )
