"""Spanning-tree push-pull decentralized SGD, baselines, and an experiment harness."""

from .harness import ExperimentConfig, RunRecord, emit_csv, run_experiment, sweep_n
from .mixing import (
    MixingMatrix,
    build_pull_matrix,
    build_push_matrix,
    indicator_power,
    metropolis_weights,
    spectral_norm_defect,
    stationary_vectors,
    uniform_column_weights,
)
from .oracles import GradientStream, gen_logistic, gen_quadratic
from .optimizers import (
    SwarmState,
    dsgd_step,
    dsgt_step,
    init_state,
    metrics,
    pushdiging_step,
    sgp_step,
    stpp_init,
    stpp_step,
)
from .theory import (
    theoretical_stepsize_convex,
    theoretical_stepsize_nonconvex,
    transient_bound,
)
from .topology import (
    DirectedGraph,
    SpanningTree,
    check_strongly_connected,
    extract_pull_tree,
    extract_push_tree,
    gen_directed_ring,
    gen_grid,
    gen_multi_subring,
    gen_ring,
    gen_static_exponential,
    tree_stats,
)

__version__ = "0.1.0"
