"""Potential theory on metric graphs and the tropical moment of their Jacobians."""

from .errors import *  # noqa: F401,F403
from .graph import (
    OneChain,
    WeightedGraph,
    betti_number,
    contract_edge,
    incidence_matrix,
    laplacian,
    parse_graph,
    subdivide_edge,
)
from .invariants import (
    InvariantReport,
    banana_moment,
    genus2_local_invariant,
    invariant_report,
    linear_identity_residual,
    tau_invariant,
    total_length,
    tropical_moment,
)
from .kernel import DiscreteMeasure, PotentialKernel, build_kernel
from .trees import (
    TreeEnsemble,
    center_norm_average,
    edge_probability,
    energy_level,
    energy_level_average,
    enumerate_spanning_trees,
    pair_probability,
    star_s,
    star_t,
    tree_center,
)
from .voronoi import (
    LatticeBasis,
    cell_decomposition,
    decomposition_point_location,
    homology_basis,
    moment_by_theta_montecarlo,
    moment_by_trees,
    voronoi_membership,
)

__version__ = "0.1.0"
