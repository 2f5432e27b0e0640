"""Dual-path LSTM dereverberation model."""
from .lstm import LstmStackParams, init_lstm_stack, lstm_backward, lstm_forward
from .model import (DplstmParams, dplstm_backward, dplstm_forward, head_exclusive_parameters,
                    init_params, loss, normalize_input)
from .training import (Adam, TrainConfig, TrainHistory, decompose_signal, enhance,
                    enhance_stacked, evaluate_loss, load_pairs, train)
from .gradcheck import gradient_check

__all__ = [
    "Adam", "DplstmParams", "LstmStackParams", "TrainConfig", "TrainHistory",
    "decompose_signal", "dplstm_backward", "dplstm_forward", "enhance", "enhance_stacked",
    "evaluate_loss", "gradient_check", "head_exclusive_parameters", "init_lstm_stack",
    "init_params", "load_pairs", "loss", "lstm_backward", "lstm_forward", "normalize_input",
    "train",
]
