"""Exception types shared across the package."""


class GraphError(ValueError):
    """Invalid operation on a graph or redundant graph."""


class UnknownQubitError(GraphError, KeyError):
    """A qubit or vertex id that is not present was referenced."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class ImpossibleOutcomeError(GraphError):
    """A measurement or fusion branch of zero probability was requested."""


class PlanError(ValueError):
    """Malformed generation plan."""
