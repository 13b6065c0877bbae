"""Observable Wasserstein distances on finite metric spaces.

Scalable lower bounds on Wasserstein p-distances via 1-Lipschitz wedge
observables, with exact OT ground truth, sliced/Chamfer baselines, and a
seeded experiment harness.
"""

from .errors import AtomLimitError, ContractError, InputFormatError, OwdistError
from .metric import (
    DiscreteMeasure,
    FiniteMetricSpace,
    build_graph_space,
    build_point_cloud_space,
    build_sphere_space,
    explicit_space,
    make_measure,
    uniform_measure,
)
from .observables import (
    Observable,
    ObservableSet,
    distance_observable,
    eval_observable,
    eval_observable_many,
    intersection_ball_mass,
    observable,
    pushforward,
    sample_anchored_set,
    subset_expansion,
    union_ball_mass,
    union_ball_observable,
    weighted_voronoi_cells,
)
from .ot import LineMeasure, TransportPlan, exact_wasserstein, line_measure, wasserstein_1d
from .owd import (
    DeltaCover,
    OwdResult,
    farthest_point_cover,
    greedy_delta_cover,
    nested_anchored_sets,
    owd_estimate,
    quantize_measure,
    quantized_distance_error,
)
from .baselines import SliceSet, chamfer, sample_slices, sliced_wasserstein
from .experiments import (
    GaussianConfig,
    GeometricGraph,
    GraphConfig,
    HeatDistribution,
    LabeledDataset,
    ResultTable,
    SphereConfig,
    add_cloud_noise,
    gaussian_dataset,
    heat_distribution,
    nn_classification_score,
    random_geometric_graph,
    relative_error,
    run_gaussian_experiment,
    run_graph_experiment,
    run_sphere_experiment,
    sphere_pair,
)

__version__ = "0.1.0"
