"""Exception hierarchy shared by every wavesearch module."""


class WaveSearchError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(WaveSearchError, ValueError):
    """A numeric argument lies outside its allowed range."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class TargetIndexError(WaveSearchError, IndexError):
    """A target index does not address an item of the register."""


class UnsupportedModeError(WaveSearchError):
    """The requested evolution path cannot handle these parameters."""


class DegenerateStateError(WaveSearchError, ValueError):
    """A state is undefined (zero norm, zero reference energy, ...)."""


class MistimedTapError(WaveSearchError):
    """A tap was requested while the oscillators were displaced.

    The elastic-reflection oracle is only defined at instants where every
    displacement vanishes; ``displacement`` carries the offending value.
    """

    def __init__(self, displacement, tolerance, time=None):
        self.displacement = float(displacement)
        self.tolerance = float(tolerance)
        self.time = time
        where = "" if time is None else f" at t={time:.6g}"
        super().__init__(
            f"tap{where} with max |x| = {self.displacement:.3e} "
            f"> tolerance {self.tolerance:.3e}"
        )
