"""Exception hierarchy shared by every bmckit module."""

from typing import Optional


class BmcError(ValueError):
    """Base class for all toolkit errors."""


class InvalidModel(BmcError):
    """A model, kernel or distribution failed construction validation."""


class NonErgodic(BmcError):
    """The chain is reducible, periodic, or power iteration did not converge."""


class DimensionMismatch(BmcError):
    """Two inputs that must share a dimension do not."""


class PathTooShort(BmcError):
    """A sample path is shorter than the operation requires."""


class MissingRow(BmcError):
    """A higher-order chain reached a window whose row is all zero."""

    def __init__(self, window: tuple):
        self.window = window
        super().__init__(f"Transition row for window {window} is all zero")


class ZeroMassCluster(BmcError):
    """A cluster is empty or has no outgoing transitions."""

    def __init__(self, cluster: int, reason: str = "has zero outgoing mass"):
        self.cluster = cluster
        super().__init__(f"Cluster {cluster} {reason}")


class ZeroProbabilityTransition(BmcError):
    """An observed transition has probability zero under a candidate kernel."""

    def __init__(self, t: int, i: int, j: int, kernel: str = ""):
        self.t = t
        self.i = i
        self.j = j
        label = f" under {kernel}" if kernel else ""
        super().__init__(f"Transition {i}->{j} at step {t} has zero probability{label}")


class SupportMismatch(BmcError):
    """Two kernels disagree on which entries are positive."""

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"Kernels disagree on support at entry ({i}, {j})")


class InvalidZ(BmcError):
    """Confidence level outside the open interval (0, 1)."""


class NoConvergence(BmcError):
    """The spectral fixed point did not converge at a grid point."""

    def __init__(self, x: float, residual: float, iterations: Optional[int] = None):
        self.x = x
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Fixed point did not converge at x={x:.6g} (residual {residual:.3e}"
            + (f" after {iterations} iterations)" if iterations is not None else ")")
        )


class EmptyAfterFilter(BmcError):
    """Frequency filtering removed every token."""


class DegenerateCell(BmcError):
    """Longitude cell width collapses near the poles."""

    def __init__(self, lat: float, cosine: float):
        self.lat = lat
        self.cosine = cosine
        super().__init__(f"Degenerate grid cell at latitude {lat} (|cos|={cosine:.3e})")


class VocabularyMismatch(BmcError):
    """Paths to be joined do not share alphabet size and vocabulary."""
