"""Automata-network simulator for word consensus under phonological confusion."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .automaton import (
    Added, AgentState, Collapsed, Configuration, RunResult, SimParams, Simulation,
    collapse_candidates, init_configuration, is_fixed_point, local_update, partition_conveyed, run, step,
)
from .lexicon import Alphabet, confounds, hamming, lex_min, random_word, word_from_text, word_to_text
from .metrics import consensus_stats, energy
from .network import Network, Schedule, load_edge_list, make_torus, next_vertex
from .rng import Stream
