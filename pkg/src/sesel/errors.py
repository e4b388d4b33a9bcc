"""Exception taxonomy for the selection engine.

Every error carries a stable machine-readable ``name`` (its class name) so the
CLI can report failures uniformly and bindings can map them 1:1.
"""


class SeselError(Exception):
    """Base class for all engine errors."""

    exit_code = 3  # data error by default; see cli for the full mapping

    @property
    def name(self) -> str:
        return type(self).__name__


class UsageError(SeselError):
    """Invalid configuration or flag combination."""

    exit_code = 2


# dataset_io
class IoError(SeselError):
    pass


class FormatError(SeselError):
    pass


class EmptyDataset(SeselError):
    pass


class MissingIndex(SeselError):
    pass


class DuplicateIndex(SeselError):
    pass


# knn_graph
class ZeroVector(SeselError):
    pass


class InvalidK(UsageError):
    pass


# encoding_tree
class IsolatedNode(SeselError):
    pass


class SameNode(UsageError):
    pass


# entropy
class TreeGraphMismatch(SeselError):
    pass


class TooLarge(UsageError):
    pass


# scoring
class LengthMismatch(SeselError):
    pass


class InvalidBeta(UsageError):
    pass


# sampler
class InfeasibleBudget(SeselError):
    exit_code = 4


# replay memory
class CapacityTooSmall(UsageError):
    pass


class NoMergeablePair(SeselError):
    pass
