"""Exception types shared across the package."""

from __future__ import annotations


class HqcError(ValueError):
    """Rejected input or precondition; ``witness`` names the offending point."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SingularPointError(HqcError):
    """Evaluation requested at a boundary singularity of a closed form."""


class InputFormatError(HqcError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno
