"""Exception types raised across the package."""


class RenderFreeError(Exception):
    """Base class for all package errors."""


class DegenerateFrame(RenderFreeError, ValueError):
    pass


class BehindCamera(RenderFreeError, ValueError):
    pass


class EmptyForeground(RenderFreeError, ValueError):
    pass


class EmptyBackground(RenderFreeError, ValueError):
    pass


class InconsistentView(RenderFreeError, ValueError):
    pass


class ShapeMismatch(RenderFreeError, ValueError):
    pass


class DegenerateCloud(RenderFreeError, ValueError):
    pass


class EmptyCloud(RenderFreeError, ValueError):
    pass


class GridMismatch(RenderFreeError, ValueError):
    pass


class BadParams(RenderFreeError, ValueError):
    pass


class NothingVisible(RenderFreeError, ValueError):
    pass


class ParseError(RenderFreeError, ValueError):
    pass


class UnsupportedFormat(RenderFreeError, ValueError):
    pass


class NumericalFailure(RenderFreeError, ArithmeticError):
    pass
