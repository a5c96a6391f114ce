"""Exception types raised by nnpres."""


class NNPresError(Exception):
    """Base class for all library errors."""


class NotSymmetric(NNPresError, ValueError):
    pass


class NotTriangular(NNPresError, ValueError):
    pass


class StructureMismatch(NNPresError, ValueError):
    """A declared structure tag fails its validator."""


class ParseError(NNPresError, ValueError):
    pass


class NoConvergence(NNPresError, ArithmeticError):
    pass


class ComplexSpectrum(NNPresError, ValueError):
    pass


class ImaginaryResidue(NNPresError, ArithmeticError):
    """Inverse DFT left a non-negligible imaginary part (an evaluation bug)."""


class SpectraOverlap(NNPresError, ArithmeticError):
    pass


class NotAnnihilating(NNPresError, ValueError):
    pass


class SeriesDivergenceGuard(NNPresError, ArithmeticError):
    pass


class PatternViolation(NNPresError, AssertionError):
    """Entry ``(p, i, j)`` of an anti-bidiagonal power broke the expected pattern."""

    def __init__(self, p, i, j, value, expected):
        self.p, self.i, self.j = p, i, j
        self.value, self.expected = value, expected
        super().__init__(
            f"A^{p}[{i},{j}] = {value!r}, expected {expected!r}")


class MixedParity(NNPresError, ValueError):
    pass


class ParityUnsupported(NNPresError, ValueError):
    """Even/odd part has no closed-form g or h in the function library."""


class ShiftTooSmall(NNPresError, ValueError):
    pass
