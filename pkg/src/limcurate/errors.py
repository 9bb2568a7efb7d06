"""Exception hierarchy.

Each error class carries the process exit code the command line maps it
to: 1 usage, 2 parse, 3 degenerate math, 4 io.
"""


class LimError(Exception):
    exit_code = 1


class UsageError(LimError):
    exit_code = 1


class ParseError(LimError):
    exit_code = 2

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}:"
        super().__init__(f"{where} {message}" if where else message)


class RaggedLog(ParseError):
    def __init__(self, sample_id, expected, found, line=None, path=None):
        self.sample_id = sample_id
        self.expected = expected
        self.found = found
        super().__init__(
            f"ragged log: sample {sample_id!r} has {found} epochs, expected {expected}",
            line=line,
            path=path,
        )


class DuplicateRecord(ParseError):
    def __init__(self, sample_id, epoch, line=None, path=None):
        self.sample_id = sample_id
        self.epoch = epoch
        super().__init__(
            f"duplicate record for sample {sample_id!r} epoch {epoch}",
            line=line,
            path=path,
        )


class ValueOutOfRange(ParseError):
    pass


class UnknownSample(ParseError):
    def __init__(self, sample_id, line=None, path=None):
        self.sample_id = sample_id
        super().__init__(f"unknown sample id {sample_id!r}", line=line, path=path)


class EmptyLog(LimError):
    exit_code = 2


class DegenerateAverage(LimError):
    """The average curve is saturated at 1 in every epoch, so alignment is undefined."""

    exit_code = 3


class TooFewEpochs(LimError):
    exit_code = 3


class EmptyRollouts(LimError):
    exit_code = 3


class CountExceedsPopulation(UsageError):
    pass


class BudgetExceedsPopulation(UsageError):
    pass
