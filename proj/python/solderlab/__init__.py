"""Python access to the solderlab puzzle checks."""

from ._solderlab import (
    DimensionError,
    DomainError,
    FormatError,
    ParseError,
    PreconditionError,
    Puzzle,
    SingularError,
    SolderlabError,
    command_names,
    evaluate,
    run,
)

__all__ = [
    "DimensionError",
    "DomainError",
    "FormatError",
    "ParseError",
    "PreconditionError",
    "Puzzle",
    "SingularError",
    "SolderlabError",
    "command_names",
    "evaluate",
    "run",
]
