"""Sparse iterative solver toolkit: restarted GMRES with the GMRES
minimum-residual polynomial preconditioner, automatic degree selection,
ILU(0) composition, and communication-proxy cost accounting."""

from .counters import CostCounters
from .errors import (
    CholeskyFailure,
    ConfigError,
    DimensionMismatchError,
    MatrixFormatError,
    MatrixMarketParseError,
    NumericalBreakdownError,
    ParameterError,
    PivotError,
    SingularHessenbergError,
    UnsupportedFormatError,
)
from .gmres import (
    GmresConfig,
    GmresResult,
    IluPreconditionedOperator,
    MatrixOperator,
    PolynomialWrappedOperator,
    cost_report,
    hessenberg_lsq,
    solve,
)
from .ilu import Ilu0Factors, ilu0_apply, ilu0_factor
from .ortho import OrthoResult, icgs
from .polyprec import (
    GramSystem,
    PolyCoefficients,
    apply_poly,
    auto_degree,
    build_poly,
    dense_cholesky,
    lambda_p_lambda,
    random_seed_vector,
)
from .sparse import (
    CsrMatrix,
    bidiag1,
    bidiag2,
    gen_bidiag,
    gen_convdiff2d,
    gen_laplacian2d,
    gen_laplacian_rhs,
    read_matrix_market,
    spmv,
    write_matrix_market,
)

__version__ = "0.1.0"
