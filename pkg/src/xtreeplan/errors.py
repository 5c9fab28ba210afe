"""Exception hierarchy shared across the package."""


class PlanningError(Exception):
    """Base class for all errors raised by xtreeplan."""


class InputError(PlanningError):
    """Bad user-supplied data or parameters. The CLI maps these to exit status 2."""


class MissingTargetColumn(InputError):
    pass


class NonNumericFeature(InputError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as a number")


class InvalidTargetValue(InputError):
    pass


class EmptyDataset(InputError):
    pass


class TooFewInstances(InputError):
    pass


class IncompatibleSchemas(InputError):
    pass


class FewerThanTwoProjects(InputError):
    pass


class EmptyInput(InputError):
    pass


class InputMismatch(InputError):
    pass


class EmptyTrainingSet(InputError):
    pass


class SingleClassTraining(InputError):
    pass


class NotALeaf(PlanningError):
    pass


class UnknownFeature(InputError):
    pass


class TargetInFamily(InputError):
    pass


class ZeroBaseline(PlanningError):
    """The improvement ratio is undefined when nothing was predicted defective."""


class EmptyGroup(InputError):
    pass
