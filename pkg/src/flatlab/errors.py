"""Exception types raised by flatlab."""


class KinkProximityError(RuntimeError):
    """An evaluation point sits too close to a rectifier kink.

    Second-derivative routines use finite differences of the analytic
    gradient; inside a band of width ``step`` around a kink the loss is not
    twice differentiable and the results would be meaningless, so they
    refuse to run instead.
    """

    def __init__(self, distance: float, step: float, example_index: int,
                 layer: int, unit: int):
        self.distance = distance
        self.step = step
        self.example_index = example_index
        self.layer = layer
        self.unit = unit
        super().__init__(
            f"kink proximity: |preactivation| = {distance:.3e} <= step {step:.3e} "
            f"for hidden layer {layer}, unit {unit}, example {example_index}"
        )


class TrainingDivergedError(RuntimeError):
    """Gradient descent blew up instead of settling into a minimum."""

    def __init__(self, epoch: int, loss: float, initial_loss: float):
        self.epoch = epoch
        self.loss = loss
        self.initial_loss = initial_loss
        super().__init__(
            f"training diverged at epoch {epoch}: loss {loss:.3e} "
            f"exceeds 1e6 x initial loss {initial_loss:.3e}"
        )
