"""
Exception hierarchy of gdlkit

Every grouping base class carries the process exit code the CLI returns when
an error of that group escapes a command.
"""


class GdlError(Exception):
    exit_code = 1


# configuration (exit 1)
class ConfigError(GdlError):
    exit_code = 1

class ArchitectureError(ConfigError):
    pass


# data, graph, shape and checkpoint errors (exit 2)
class DataError(GdlError):
    exit_code = 2

class ShapeMismatch(DataError, ValueError):
    pass

class DomainError(DataError, ValueError):
    pass

class NonFinite(DataError, ValueError):
    pass

class LabelOutOfRange(DataError, ValueError):
    pass

class SupportMismatch(DataError, ValueError):
    pass

class ZeroParameter(DataError, ValueError):
    pass

class NonInjectiveIndex(DataError, ValueError):
    pass

class NonFiniteProbability(DataError, ValueError):
    pass


class TapeError(GdlError):
    exit_code = 2

class NonScalarRoot(TapeError):
    pass

class TapeMismatch(TapeError):
    pass


class GraphError(DataError):
    pass

class IncompleteOrientation(GraphError):
    pass

class WeightPatternMismatch(GraphError):
    pass

class IsolatedNode(GraphError):
    pass

class DuplicateEdge(GraphError):
    pass

class SelfLoop(GraphError):
    pass


class DatasetError(DataError):
    pass

class BadMagic(DatasetError):
    pass

class TruncatedFile(DatasetError):
    pass

class CountMismatch(DatasetError):
    pass

class UnknownNodeId(DatasetError):
    pass

class MalformedLine(DatasetError):
    pass

class BadFractions(DatasetError, ValueError):
    pass

class BatchTooLarge(DataError, ValueError):
    pass

class EmptyMask(DataError, ValueError):
    pass

class BadCheckpoint(DataError):
    pass


# numerical blow-ups during training (exit 3)
class TrainingDiverged(GdlError):
    exit_code = 3

class NonFiniteLoss(TrainingDiverged):
    pass

class NonFiniteGradient(TrainingDiverged):
    pass
