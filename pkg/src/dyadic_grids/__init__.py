from .covering import ArbitraryInterval, cover, inner, two_dyadic_cover  # noqa F401
from .errors import (  # noqa F401
    DomainError,
    PreconditionError,
    ResolutionError,
    VerificationError,
)
from .exact import covering_constant, relative_distance  # noqa F401
from .grids import Domain, GridSpec, IntervalId, locate  # noqa F401
from .mesh import MeshFunction1D, MeshFunction2D, MeshWeight1D, MeshWeight2D  # noqa F401
from .verification import VerificationReport  # noqa F401
from .version import __version__  # noqa F401
