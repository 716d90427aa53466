"""Mutual information estimation benchmark: KSG and plugin estimators,
closed-form references, and Monte Carlo confidence-interval experiments."""

__version__ = "0.1.0"

from .analytic import AnalyticMI, analytic_mi_gauss, analytic_mi_student, digamma, log_beta
from .estimators import EstimatorConfig, estimate, ksg_mi, ksg_mi_naive, plugin_mi
from .neighbors import BACKEND, NeighborIndex, build_knn_index
from .sampling import DistributionSpec, Sample, analytic_mi, apply_transform, sample
