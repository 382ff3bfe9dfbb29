"""Exception hierarchy shared across the pipeline.

Exit-code mapping for the command line lives on the classes so that the
CLI can translate any pipeline failure uniformly: 2 for input/IO problems,
3 for data-contract violations, 4 for model-artifact problems.
"""


class PipelineError(Exception):
    exit_code = 1


class InputError(PipelineError):
    """A file is missing, unreadable, or structurally malformed."""

    exit_code = 2


class MissingColumnError(InputError):
    def __init__(self, path, column):
        super().__init__(f"{path}: missing required column {column!r}")
        self.path = path
        self.column = column


class DuplicateDateError(InputError):
    def __init__(self, path, date):
        super().__init__(f"{path}: duplicate date {date.isoformat()}")
        self.path = path
        self.date = date


class DuplicateDocIdError(InputError):
    def __init__(self, path, doc_id):
        super().__init__(f"{path}: duplicate doc_id {doc_id!r}")
        self.path = path
        self.doc_id = doc_id


class SelectorSyntaxError(InputError):
    def __init__(self, selector):
        super().__init__(f"malformed selector {selector!r} (expected 'tag' or 'tag.class')")
        self.selector = selector


class DataContractError(PipelineError):
    """Inputs are well-formed but violate an operation's contract."""

    exit_code = 3


class EmptyTrainingSetError(DataContractError):
    pass


class EmptyTableError(DataContractError):
    pass


class EmptySeriesError(DataContractError):
    pass


class EmptyInputError(DataContractError):
    pass


class NoOverlapError(DataContractError):
    pass


class SingleClassError(DataContractError):
    pass


class TooFewMinorityError(DataContractError):
    pass


class DegenerateSplitError(DataContractError):
    pass


class BadKError(DataContractError):
    pass


class BadThresholdsError(DataContractError):
    pass


class DimensionMismatchError(DataContractError):
    pass


class ZeroVectorError(DataContractError):
    pass


class LengthMismatchError(DataContractError):
    pass


class ArtifactError(PipelineError):
    """Model artifact is corrupt, has the wrong version, or does not match the data."""

    exit_code = 4
