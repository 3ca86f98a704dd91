"""Moment-matching model reduction and closed-loop controller reduction for
single-input single-output LTI systems."""
from .errors import (BudgetExhausted, CancellationUnsafe, FileFormatError, IllPosed, Improper,
                     MomentMatchingError, NotObservable, PlacementFailed, PoleHit, Singular,
                     SpectraOverlap, Unstable, UnstableSystem)
from .linalg import solve_sylvester, sylvester_kron
from .lti import Realization, eval_transfer, moment_resolvent, negative_feedback, static_gain
from .siggen import (BlockGenerator, SignalGenerator, compose, make_jordan, make_polynomial,
                     make_sinusoid, make_step, trajectory)
from .momentmatch import (check_tracking_condition, design_G, design_G_stabilize, moments_of,
                          reduce, tracking_family)
from .sim import simulate_cascade, simulate_closed_loop, simulate_tracking_loop, verdict
from .clred import (ReductionConfig, build_compensator, certify, certify_loop, extract_controller,
                    reduce_closed_loop)

__version__ = "0.1.0"
