"""Temporal graph representation learning by aligning a Hawkes temporal
intensity with a GNN-plus-global structural intensity."""

from .config import MODES, RunConfig
from .graph import (Batch, Interaction, NeighborSequence, ParseError, SequenceStore,
                    TemporalGraph, chronological_split, load_edge_list, make_batches,
                    parse_edge_list, record_interaction)
from .params import (GradReport, ModelParams, OptimizerState, adam_step, base_embedding,
                     finite_difference_check, init_params, load_checkpoint, save_checkpoint)
from .training import TrainResult, train
from .evaluation import EvalReport, evaluate_link_prediction

__version__ = "0.1.0"
