"""Cost-minimal machine rental scheduling with setup times and deadlines."""

from .core import (Assignment, Instance, Job, MachineParams, MachineType,
                   Rental, Schedule, ValidationReport, Violation,
                   ViolationKind, as_time, max_slack, min_slack, rental_cost,
                   slack, total_cost, validate)
from .harness import (CausalityError, RunReport, SimContext,
                      competitive_ratio, run_online)
from .algorithms import (BatchedDispatch, GreedyFit, GreedyFitPolicy,
                         POLICIES, SlackClass, SoloDispatch, UnclassifiableJob,
                         a1, a1_choose_type, batched_dispatch, bd_classify,
                         greedyfit, greedyfit_reasonable, make_algorithm,
                         uses_precautionary)
from .tentative import (CandidateInterval, InfeasibleTentativeProblem,
                        JobRestriction, SizeClass, TentativeProblem,
                        TentativeSolution, generate_candidate_intervals,
                        size_classify, solve_exact, solve_firstfit)
from .oracle import (OptResult, brute_force_opt, gen_greedyfit_adv,
                     gen_lb_mid_eps, gen_lb_small_eps_a, gen_lb_small_eps_b,
                     gen_prop1, gen_stack, gen_random,
                     witness_greedyfit_adv, witness_lb_mid_eps,
                     witness_lb_small_eps_a, witness_lb_small_eps_b,
                     witness_stack)

__version__ = "0.1.0"
