"""Operation tallies used as communication proxies."""

from dataclasses import dataclass


@dataclass
class CostCounters:
    """Running totals of the operations a solve performs.

    ``dots`` follows the fixed accounting convention of three dot products
    per inner iteration (two block inner products plus one norm from the
    two-pass orthogonalization) plus two block inner products per
    polynomial construction.  ``scalar_dots`` tallies every scalar inner
    product and norm actually evaluated, so a block product against a
    basis of j vectors adds j there.  Preconditioner triangular solves go
    to ``prec_applies`` and never inflate ``spmvs``, which counts products
    with the system matrix only.

    All fields are monotonically non-decreasing; one instance is confined
    to a single solve context.
    """

    spmvs: int = 0
    dots: int = 0
    scalar_dots: int = 0
    vector_updates: int = 0
    prec_applies: int = 0

    def snapshot(self):
        """Immutable copy of the current totals."""
        return (
            self.spmvs,
            self.dots,
            self.scalar_dots,
            self.vector_updates,
            self.prec_applies,
        )

    def as_dict(self):
        return {
            "spmvs": self.spmvs,
            "dots": self.dots,
            "scalar_dots": self.scalar_dots,
            "vector_updates": self.vector_updates,
            "prec_applies": self.prec_applies,
        }
