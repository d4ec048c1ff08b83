"""Non-transitive past-directed linear temporal logic with a bounded Since.

Parsing, evaluation on lasso models, reduced normal forms of rules,
satisfiability and theoremhood, admissibility analysis, and multi-agent
knowledge operators.
"""

from .admissibility import (Admissible, NotAdmissible, SearchBudget, Unknown,
                            admissible_status, find_non_admissibility_witness,
                            match_n_elimination, premises_unifiable)
from .decision import (LassoWitness, brute_force_sat, frame_valid_rule, is_theorem,
                       refutable_rnf, satisfiable)
from .knowledge import (AgentProfile, eval_shared_knowledge, eval_voted_knowledge,
                        vote_model)
from .normal_form import RnfRule, rnf_to_rule, rnf_transform, to_single_premise
from .semantics import (NonUniform, PeriodicModel, TruthVector, Uniform, eval_formula,
                        eval_unbounded, rule_holds, shift, truth_vector)
from .syntax import (Formula, Rule, apply_substitution, expand_derived, parse_formula,
                     parse_rule, render, temporal_reach)

evaluate = eval_formula

__version__ = "0.1.0"
