"""Exception types shared across the package."""


class GraphVarError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GraphVarError):
    """Malformed or inconsistent user input (graphs, functions, parameters)."""


class LoadError(InputError):
    """A file could not be parsed into a graph, measure, or coefficient."""


class HypothesisError(InputError):
    """A structural hypothesis (positivity, integrability, bounds) fails.

    The message names the offending vertex or edge whenever one exists.
    """


class DegenerateInputError(InputError):
    """Input is formally valid but makes the requested quantity undefined."""


class NumericalError(GraphVarError):
    """An iterative solver failed to reach its tolerance."""


class InvariantError(GraphVarError):
    """A certified inequality failed at runtime; indicates a solver bug."""
