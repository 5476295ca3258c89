"""Qualitative dynamics of tent-like interval maps.

Closed-form node towers, trapping regions, level partitions, and backward
orbit limits, each cross-checked by a grid-based chain-recurrence oracle.
"""

from .maps import (Interval, PiecewiseMap, hausdorff, make_logistic, make_tent,
                   make_tu, merge_intervals, subtract_intervals, tu_skeleton)
from .orbits import (Cycle, critical_orbit, cycle_multiplier, find_cycle,
                     interior_fixed_point, make_cycle)
from .structure import (CantorCover, CoreCollection, LevelPartition, Node,
                        Renormalization, TrappingRegion, analytic_nodes,
                        cantor_cover, classify_attractor, classify_point,
                        core_of_node, is_cyclic, level_partition, node_depth,
                        renormalize, trapping_region, tu_cycle, tu_nodes)
from .chainoracle import (ChainClasses, GridGraph, MatchReport, build_grid,
                          chain_classes, conley_graph, expansion_bound,
                          expansion_time, match_nodes, oracle_report,
                          recurrent_cells, verify_tower)
from .backward import (BackwardTree, DenseOrbit, PredictedSAlpha, SAlphaEstimate,
                       build_backward_tree, compare_salpha, dense_backward_orbit,
                       predicted_salpha, salpha)

__version__ = "0.1.0"
