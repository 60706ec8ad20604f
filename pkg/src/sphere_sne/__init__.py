"""Stochastic neighbor embedding of spherical data with von Mises-Fisher kernels."""

__version__ = "0.1.0"

from .affinity import (
    CalibrationResult,
    calibrate_kappas,
    check_affinity,
    conditional_row,
    joint_p,
    joint_q,
    row_perplexity,
    vmf_joint_p,
)
from .errors import DomainError, GenerationError, NumericError, SphereSNEError
from .evaluation import EvalReport, center_images, classify, evaluate
from .optimizer import EmbeddingRun, VmfSneConfig, auto_learning_rate, gradient, kl_cost, run, step
from .simgen import Dataset, SimSpec, generate_centers, generate_dataset
from .tsne import TsneConfig, tsne_joint_p, tsne_joint_q, tsne_run
from .vmf import (
    VmfParams,
    log_density,
    log_norm_const,
    mean_resultant_length,
    sample_uniform_sphere,
    sample_vmf,
)
