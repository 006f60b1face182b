"""Exception and warning types shared by all pencilph modules."""


class PencilPHError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(PencilPHError):
    """Input violates a documented precondition (shape, finiteness, symmetry)."""


class SpectrumClash(PencilPHError):
    """A Lyapunov/Sylvester solve hit (near-)opposite eigenvalue pairs."""


class SingularPencil(PencilPHError):
    """Operation requires a regular pencil but det(sE - A) vanishes identically."""


class NotStable(PencilPHError):
    """Operation requires a (asymptotically) stable pencil."""


class IndexTooHigh(PencilPHError):
    """Operation requires index at most one."""


class NotControllable(PencilPHError):
    """Bernoulli solve failed because the anti-stable pair is not controllable."""


class ImagJordanBlock(PencilPHError):
    """An imaginary-axis eigenvalue is not semi-simple."""


class CertificateMismatch(PencilPHError):
    """A recast certificate fails its defining relations beyond tolerance."""


class CompositionDefect(PencilPHError):
    """Subspace composition did not produce a square pencil."""


class DegenerateLagrangian(PencilPHError):
    """Candidate Lagrangian range representation has dimension below n."""


class NotDissipative(PencilPHError):
    """Candidate dissipative structure violates its sign condition."""


class NotNonnegative(PencilPHError):
    """Lagrangian structure lacks the required nonnegativity."""


class IllConditionedError(PencilPHError):
    """A decoupling or normalization solve is too ill-conditioned to trust."""


class ParseError(PencilPHError):
    """Problem file is malformed; message carries field/line context."""


class UsageError(PencilPHError):
    """Command incompatible with the given problem kind or flags."""


class IllConditionedWarning(UserWarning):
    """A rank decision sits close to the tolerance threshold; results kept."""
