"""Exception types raised by alphamatch.

Every precondition failure derives from :class:`ContractError`, so callers
(the CLI in particular) can separate bad input from I/O trouble, which is
left to the builtin :class:`OSError` family.
"""


class ContractError(ValueError):
    """An operation was called with arguments violating its preconditions."""


class DegenerateTemplateError(ContractError):
    """The template has zero energy, so the amplitude estimate is undefined."""


class DegenerateSequenceError(ContractError):
    """A sequence with zero Euclidean norm cannot be normalized."""


class TemplateTooLongError(ContractError):
    """The template is not shorter than the data it is slid across."""


class UnsupportedFormatError(ContractError):
    """A file is well formed but uses a layout we do not read (e.g. stereo WAV)."""


class ParseError(ContractError):
    """A series file could not be parsed.

    ``offset`` is a byte offset for binary formats and a 1-based line number
    for text formats; ``unit`` says which.
    """

    def __init__(self, message, path=None, offset=None, unit="byte"):
        self.path = path
        self.offset = offset
        self.unit = unit
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"{unit} {offset}")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)
