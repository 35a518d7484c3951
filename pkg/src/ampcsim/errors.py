"""Exception types shared across algorithm modules."""


class StructureError(ValueError):
    """Input violates a structural precondition (not cycles, broken chain, ...)."""


class CapacityError(RuntimeError):
    """A residual problem does not fit the designated single machine."""


class NonTerminationError(RuntimeError):
    """An iteration cap was exceeded; indicates a mis-set parameter."""


class LeaderContractionError(RuntimeError):
    """Rare sampling failure: a high-degree vertex saw no incident leader.

    Callers retry with a fresh seed; at desk scale the leader probability is
    1 and this cannot trigger.
    """
