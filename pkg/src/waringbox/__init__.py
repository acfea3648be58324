"""waringbox: a desk-scale laboratory for counting solutions of
x_1^k + ... + x_s^k = N in boxes 1 <= x_j <= P_j with circle-method
diagnostics: exact counters, Weyl sums, arc dissections, singular series
and singular integral, and a reproducible measurement harness."""

from .limits import DEFAULT_GUARDS, Guards, GuardExceeded, QuadratureError, ValidationError
from .model import (BoxSpec, BoxClass, Thresholds, classify_box,
                    compute_thresholds, iroot, no_solutions_possible,
                    truncate_box)
from .counting import (CountResult, Method, WeightedSum, hua_moment_count,
                       root_count, root_count_bruteforce,
                       root_count_convolution, root_count_mitm,
                       solution_multisets, vinogradov_count,
                       weighted_tail_sum)
from .expsums import (PhasePoint, eval_S, eval_f, eval_v, phase_frac,
                      v_kernel, weyl_rhs)
from .circle import (Arc, ArcClassification, Dissection, classify_alpha,
                     dirichlet_closed_form, dissect, full_circle_integral,
                     major_approx_V, major_arc_integral, singular_series,
                     singular_series_tail_majorant, singular_integral_beta,
                     singular_integral_conv)
from .verify import (ReportRecord, SweepConfig, check_major_approx,
                     check_minor_sup, check_unbalanced, emit_report,
                     generate_instances, loglog_slope, sweep_bound)

__version__ = "0.1.0"
