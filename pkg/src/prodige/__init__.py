"""prodige: data representations as learnable sparse weighted graphs.

A dataset becomes a graph whose shortest-path distances are trained by
stochastic gradient descent: edge weights through a softplus
parameterization, edge existence through Bernoulli probabilities with
score-function gradients, and a mean-probability penalty that prunes
edges the task never uses.
"""

from .builders import (InteractionMatrix, VectorDataset, add_anchor_vertices,
                       build_cf_graph, build_knn_random, generate_erdos_renyi,
                       make_clustered_interactions)
from .dijkstra import (PathTrace, ShortestPath, deterministic_dijkstra,
                       presample_outcomes, recover_path, stochastic_dijkstra,
                       subgraph_distances)
from .estimators import (DistanceOracle, LossBaseline, LossValue, SparseGradient,
                         estimate_objective, prob_gradients, regularizer,
                         weight_gradients)
from .graph import (FinalGraph, StochasticGraph, edge_prob, edge_weight, finalize,
                    inverse_edge_prob, inverse_edge_weight, param_count,
                    saturation_fraction)
from .graph_io import (GraphFormatError, degree_stats, load_graph, load_interactions,
                       load_vectors, save_graph, save_vectors)
from .optim import AdamHyper, SparseAdam, default_hyperparameters
from .tasks import (CFResult, CompressionResult, EuclideanTargets, EvalReport,
                    LambdaSchedule, MatrixTargets, ReconstructionResult, TrainConfig,
                    TrainingDiverged, anchor_embedding, anchor_embeddings, cf_loss,
                    compression_loss, default_reconstruction_config,
                    evaluate_compression_mse, evaluate_hit_ratio, hit_ratio,
                    leave_one_out_split, reconstruct_graph, train_cf,
                    train_compression, train_euclidean_baseline)

__version__ = "0.1.0"
