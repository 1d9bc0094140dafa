"""Typed errors shared across the package.

Location-carrying errors use 1-based indices throughout, matching the
1-based time indexing of the public API.
"""


class CorrshiftError(Exception):
    """Base class for all package errors."""


class ConstantRow(CorrshiftError):
    """A node series has (numerically) zero variance and cannot be standardized."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node} is constant (variance below 1e-14); remove it before standardizing")


class NonPositivePrice(CorrshiftError):
    """A price panel contains an entry <= 0, so log returns are undefined."""

    def __init__(self, node, time):
        self.node = node
        self.time = time
        super().__init__(f"price at node {node}, time {time} is not strictly positive")


class BadRange(CorrshiftError):
    """A time range (i, j) is empty, reversed, or out of bounds."""


class ShapeMismatch(CorrshiftError):
    """Panels or matrices that must agree in shape do not."""


class InsufficientLength(CorrshiftError):
    """The panel is too short for the requested buffer: no candidate change points."""


class SingularCovariance(CorrshiftError):
    """Cholesky factorization of a segment covariance failed (delta too small relative to n)."""

    def __init__(self, segment):
        self.segment = segment
        super().__init__(
            f"segment covariance S{segment} is singular; "
            f"increase delta (the likelihood-ratio metric needs segments comfortably longer than n)"
        )


class SingularToeplitz(CorrshiftError):
    """The Yule-Walker autocovariance system for one node is numerically singular."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"Yule-Walker system for node {node} is singular")


class BadRho(CorrshiftError):
    """Requested exchangeable correlation falls outside the positive-definite range."""


class CholeskyFailure(CorrshiftError):
    """A synthetic covariance matrix is not positive (semi)definite."""


class NoSolution(CorrshiftError):
    """Calibration target unreachable within the search interval."""


class ParseError(CorrshiftError):
    """A CSV cell failed to parse as a number."""

    def __init__(self, line, col, text):
        self.line = line
        self.col = col
        super().__init__(f"cannot parse {text!r} as a number at line {line}, column {col}")


class RaggedRows(CorrshiftError):
    """CSV rows have inconsistent lengths."""

    def __init__(self, line, expected, got):
        self.line = line
        super().__init__(f"line {line} has {got} fields, expected {expected}")


class NonFiniteValue(CorrshiftError):
    """A CSV cell parsed to NaN or infinity."""

    def __init__(self, line, col):
        self.line = line
        self.col = col
        super().__init__(f"non-finite value at line {line}, column {col}")
