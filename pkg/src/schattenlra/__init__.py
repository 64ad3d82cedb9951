"""Matrix-vector-product algorithms for Schatten-p low-rank approximation."""
from .linop import (LinearOperator, PolyKind, PolynomialSpec, QueryLedger, Side,
                    apply, build_operator, ledger_report, polynomial_operator)
from .spectral import (INF, alt_slack, best_rank_k_error, dense_svd, pinching_slack,
                       residual_cost, schatten_norm, svd_2x2)
from .krylov import (KrylovParams, block_krylov, gap_dependent_schedule,
                     gap_independent_schedule, per_vector_errors)
from .lra import (Branch, LraConfig, frobenius_rank1_sketch, schatten_lra, select_branch,
                  spectrum_probe, streaming_footprint)

__version__ = "0.1.0"
