from .a2c import A2cAgent, a2c_losses
from .common import (
    ReplayBuffer,
    Transition,
    gae,
    masked_entropy,
    masked_greedy,
    masked_log_softmax,
    masked_sample,
    nstep_returns,
    td_target,
)
from .config import ALGORITHMS, AlgoConfig
from .dqn import DqnAgent, dqn_loss
from .ppo import PpoAgent, ppo_losses
from .qrdqn import QrdqnAgent, qrdqn_loss, quantile_huber_loss, quantile_midpoints
from .training import CurvePoint, RunRecord, evaluate, make_agent, train
from .trpo import TrpoAgent, conjugate_gradient, fisher_vector_product, masked_kl, trpo_step

__all__ = [
    "A2cAgent",
    "ALGORITHMS",
    "AlgoConfig",
    "CurvePoint",
    "DqnAgent",
    "PpoAgent",
    "QrdqnAgent",
    "ReplayBuffer",
    "RunRecord",
    "Transition",
    "TrpoAgent",
    "a2c_losses",
    "conjugate_gradient",
    "dqn_loss",
    "evaluate",
    "fisher_vector_product",
    "gae",
    "make_agent",
    "masked_entropy",
    "masked_greedy",
    "masked_kl",
    "masked_log_softmax",
    "masked_sample",
    "nstep_returns",
    "ppo_losses",
    "qrdqn_loss",
    "quantile_huber_loss",
    "quantile_midpoints",
    "td_target",
    "train",
    "trpo_step",
]
