"""Exception hierarchy shared across the package."""


class GraphPredictError(Exception):
    """Base class for all package errors."""


class NodeNotFoundError(GraphPredictError, KeyError):
    """A node id was referenced that does not exist in the graph."""


class SchemaError(GraphPredictError):
    """A schema map does not fit the CSV it was applied to."""


class ValidationError(GraphPredictError):
    """A value violates a structural invariant (NaN vector, bad range...)."""


class ProjectionError(GraphPredictError):
    """A projection spec references labels or types absent from the graph."""


class ConfigError(GraphPredictError):
    """An operation config carries invalid parameters."""


class DimensionError(GraphPredictError):
    """Vector dimensions disagree where they must match."""


class PropertyError(GraphPredictError):
    """A required node property is missing."""


class ConnectivityError(GraphPredictError):
    """A neighborhood graph is disconnected where connectivity is required."""

    def __init__(self, message, component_sizes=None):
        super().__init__(message)
        self.component_sizes = component_sizes or []


class DivergenceError(GraphPredictError):
    """An iterative optimization produced non-finite values."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ClassError(GraphPredictError):
    """Class labels do not satisfy the requirements of a separation metric."""


class StageError(GraphPredictError):
    """A pipeline stage failed mid-run."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class PipelineValidationError(GraphPredictError):
    """A pipeline config failed pre-run validation."""

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
