"""Implicit discourse relation classification via connective explicitation.

The task is reduced to two easier problems: (i) rank the connectives of a
fixed inventory by how well they join a relation's two arguments, under a
language model; (ii) classify the resulting explicit-looking relation.
The final label comes from the top-ranked connective alone (pipeline) or
from marginalizing the classifier over the whole connective distribution.
"""

__version__ = "0.1.0"

from .errors import BackendError, ConfigError, DataError, ExplicitationError

__all__ = ["ExplicitationError", "ConfigError", "DataError", "BackendError",
           "__version__"]
