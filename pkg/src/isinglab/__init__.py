"""Exact, certified and approximate computation of the Ising partition
function Z(G; beta) = sum over spin assignments of beta^(monochromatic edges),
for complex beta on bounded-degree multigraphs."""

from .errors import EXIT_CODES, IsingLabError
from .graphs import MultiGraph, Terminals, max_degree, parse_graph, emit_graph
from .numerics import GaussRat, INF, Poly, PrecisionContext
from .exact import ising_poly, ising_poly_pinned, interaction_matrix, implemented_weight, tutte_eval
from .saw import build_saw_tree, certify_zero_free, divisibility_check, tree_ratio
from .regions import classify, epsilon_Delta, barvinok_delta, in_R, r_region
from .fptas import approx_log_z, q_poly
from .gadgets import IsingProgram, Step, implement_target, program_compile, program_eval

__version__ = "0.1.0"
