"""Balanced allocation of n balls into n bins arranged as a d-regular graph,
with candidate bins sampled by non-backtracking random walks.

The package covers the allocation processes themselves (dense and sparse
choice spacing plus classical baselines), the parameter schedule the analysis
runs on, trace diagnostics (subpath multiplicities, placement uniformity, the
neighborhood potential, a pigeonhole lower bound), witness-tree construction
and verification, and a seeded experiment harness with a CLI.
"""

__version__ = "0.1.0"

from .allocation import (AllocationTrace, BallRecord, Strategy, allocate_one,
                         dump_loads_csv, dump_trace, load_trace, max_load,
                         parse_strategy, run_allocation, validate_trace)
from .graphs import (GirthRepairError, GraphError, GraphSpec,
                     InfeasibleGraphError, RegularGraph, build_graph,
                     check_girth_condition, generate_random_regular, girth,
                     load_fixture, load_graph, moore_lower_bound, save_graph)
from .harness import (ExperimentConfig, MetricsToggles, ResultRow, load_config,
                      read_results, run_experiment)
from .metrics import (LightTraceError, NDeltaReport, PathMultiplicityIndex,
                      PotentialSeries, UniformityReport,
                      build_multiplicity_index, check_N_delta,
                      empty_neighborhood_min, estimate_uniformity,
                      lower_bound_stat, potential_series)
from .params import BoundReport, DerivedParams, bounds, derive
from .rng import make_rng, stable_cell_seed, substream
from .walks import (ChoiceSet, VisitStats, Walk, canonical, make_choice_set,
                    sample_nbrw, sample_walks, walk_visit_stats)
from .witness import (SubpathPartition, VerifyResult, Violation, WitnessFailure,
                      WitnessNode, WitnessTree, branch, build_witness,
                      load_tree, partition, save_tree, tree_from_json,
                      tree_to_json, verify_witness_tree)
