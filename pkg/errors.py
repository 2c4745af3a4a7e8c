"""Exception hierarchy shared by every qcodegrad module."""


class QCodeGradError(Exception):
    """Base class for all library errors."""


class DimensionError(QCodeGradError, ValueError):
    """Shapes do not conform, or a size exceeds the configured maximum."""


class NonHermitianError(QCodeGradError, ValueError):
    pass


class NotPSDError(QCodeGradError, ValueError):
    """An eigenvalue lies below -cutoff."""


class RankDeficiencyError(QCodeGradError, ValueError):
    """Gram-Schmidt met a (numerically) linearly dependent codeword."""


class NotOrthonormalError(QCodeGradError, ValueError):
    pass


class ProbabilityError(QCodeGradError, ValueError):
    """Channel parameters outside [0, 1] or summing past 1."""


class CodeFileError(QCodeGradError, ValueError):
    """A code file is unreadable, malformed or inconsistent."""


class UnknownCodeError(QCodeGradError, ValueError):
    pass


class CodewordIndexError(QCodeGradError, IndexError):
    """A per-codeword fidelity names a codeword the code does not have."""


class NonFiniteObjectiveError(QCodeGradError, ArithmeticError):
    """An objective evaluation returned NaN or Inf."""

    def __init__(self, value, word=None, index=None, component=None):
        self.value = value
        self.word = word
        self.index = index
        self.component = component
        if word is None:
            where = "at the base point"
        else:
            where = f"after perturbing {component} of word {word}, index {index}"
        super().__init__(f"objective returned {value!r} {where}")


class ZeroNormError(QCodeGradError, ZeroDivisionError):
    """A codeword with zero norm where a normalization or division is needed."""
