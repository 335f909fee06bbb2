"""Exception types shared across the solver suite."""


class ShapeError(ValueError):
    """Dimension or layout constraint violated."""


class RankDeficiencyError(ValueError):
    """A factor column has zero norm; the input is not of full column rank."""


class DefinitenessLostError(ArithmeticError):
    """A hyperbolic rotation could not be formed because |tanh 2phi| >= 1.

    This signals that the implicit pair (A, J) is not definite, which for a
    valid full-column-rank factor cannot happen; the input is rank-deficient
    or inconsistent.
    """

    def __init__(self, block, i, j):
        self.block = block
        self.i = i
        self.j = j
        super().__init__(
            f"definiteness lost at block {block}, pivot pair ({i}, {j})"
        )


class NumericalSingularityError(ValueError):
    """A pivot fell below the singularity threshold during factorization."""
