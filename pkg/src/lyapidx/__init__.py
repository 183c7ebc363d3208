"""Lyapunov indexing for power-constrained multi-user file downloading."""
from .engine import Experiment, Metrics, TrialSummary, run_trials
from .errors import CapacityError, DomainError, InvariantViolation
from .model import (Action, SystemConfig, SystemState, UserParams, completion_prob_exponential,
                    completion_prob_geometric, expected_frame_length, validate_config)
from .multi_user import (SlotDecision, SlotQueue, queue_bound_multi, reward_g, run_multi_user,
                         select_and_act, update_slot_queue, user_index)
from .single_user import (FrameQueue, FrameRecord, choose_action, dpp_index, queue_bound,
                          run_single_user, update_frame_queue)

__version__ = "0.1.0"
