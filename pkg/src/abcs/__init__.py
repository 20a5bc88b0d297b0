"""Sequential identification of all arms better than a control under
subpopulation interaction modes: oracles, policies, and simulation."""

from .expfam import Family, bernoulli, gaussian, kl, kl_deriv2, sample
from .model import (Instance, Mode, answer_set, gaps, instance_from_dict,
                    load_instance, validate, weighted_mean)
from .glr import TransportResult, dmid, glr_statistic, glr_value, pair_transport
from .learner import AdaHedge
from .oracle import (OracleResult, homoscedastic_oracle, oblivious_oracle,
                     solve_saddle, tstar_ab_gaussian)
from .policy import (BestChallenger, Decision, ProblemMeta, RiskReport,
                     TrackAndStop, UniformPolicy, make_policy, risk_report,
                     stopping_time)
from .sim import (ReplayEnv, RunRecord, SyntheticEnv, gen_alpha_dirichlet,
                  gen_instance_uniform, load_event_log, run_episode)

__all__ = [
    "Family", "bernoulli", "gaussian", "kl", "kl_deriv2", "sample",
    "Instance", "Mode", "answer_set", "gaps", "instance_from_dict",
    "load_instance", "validate", "weighted_mean",
    "TransportResult", "dmid", "glr_statistic", "glr_value", "pair_transport",
    "AdaHedge",
    "OracleResult", "homoscedastic_oracle", "oblivious_oracle",
    "solve_saddle", "tstar_ab_gaussian",
    "BestChallenger", "Decision", "ProblemMeta", "RiskReport",
    "TrackAndStop", "UniformPolicy", "make_policy", "risk_report",
    "stopping_time",
    "ReplayEnv", "RunRecord", "SyntheticEnv", "gen_alpha_dirichlet",
    "gen_instance_uniform", "load_event_log", "run_episode",
]

__version__ = "0.1.0"
