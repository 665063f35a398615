"""Regret-minimizing multi-agent control of linear dynamical systems.

Distributed controllers with no shared policies, only shared controls: each
agent runs a projected online-gradient learner over disturbance-action policy
matrices, fed by a local policy evaluation oracle that counterfactually
replays the agent's own candidate policies against the controls everyone else
actually applied. The joint system then competes with the best fixed joint
policy in hindsight, and keeps doing so when individual actuators fail.
"""

from .lds import (DisturbanceTrace, LinearSystem, QuadCost, StabilityError,
                  StrongStabilityCert, certify_stability, generate_disturbances,
                  natures_x, natures_y, step_dynamics)
from .oco import (BallDomain, JointDecision, LearnerState, best_fixed_decision,
                  eval_multiagent_regret, multiplayer_oco_round,
                  multiplayer_ocom_round, ogd_step, play_ocom)
from .policies import (DacPolicy, DrcPolicy, LdcPolicy, LinearFeedback,
                       OpenLoopPolicy, dac_control, decoupling_check,
                       drc_control, feedback_control, load_policy_matrix,
                       save_policy_matrix)
from .peo import (MarkovOperator, PeoContext, build_markov, dac_context,
                  default_horizon, estimate_natures_y, joint_peo_eval,
                  joint_peo_grad, local_peo_eval, local_peo_grad,
                  recover_disturbance, rollout_joint_peo_eval, rollout_peo_eval)
from .controllers import (FeedbackController, GpcController, InfeasibleError,
                          MagpcController, NotStabilizableError,
                          StabilizedPlant, WrappedCost, ZeroController,
                          hinf_gain_at, hinf_synthesize, lqr_synthesize,
                          stabilize_and_wrap)
from .harness import (ConfigError, ExperimentConfig, ExperimentLog, RunResult,
                      admire_system, config_hash, constant_strategy,
                      cost_descent_strategy, demo_oco_counterexample,
                      demo_shared_controls, measure_regret_terms,
                      offline_best_dac, parse_config, run_experiment,
                      serialize_config, simulate_fixed_dac, stable_pair_system)

__version__ = "0.1.0"
