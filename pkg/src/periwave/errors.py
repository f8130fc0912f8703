"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Two profiles live on different grids."""


class PotentialOverflowError(ArithmeticError):
    """A potential was evaluated outside its safe range.

    Carries the offending grid node so high-energy sweeps fail with a
    useful message instead of returning inf.
    """

    def __init__(self, potential_name, node_index, x, argument):
        self.potential_name = potential_name
        self.node_index = node_index
        self.x = x
        self.argument = argument
        super().__init__(
            f"{potential_name}: argument {argument:.6g} at node {node_index} "
            f"(x = {x:.6g}) exceeds the safe evaluation range"
        )


class DegenerateProfileError(RuntimeError):
    """The gradient vanished; the iteration has nowhere to go (P(W) = 0 start)."""


class SubsonicError(ValueError):
    """A speed at or below the sound speed was passed where a supersonic one is required."""


class DecayOverflowError(ArithmeticError):
    """Decay-rate evaluation left the representable range of sinh."""


class InstabilityError(RuntimeError):
    """Time integration blew up (velocity norm growing geometrically)."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
