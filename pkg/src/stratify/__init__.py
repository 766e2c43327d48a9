"""Deep patient stratification."""

from .autoencoder import (
    StratificationAutoencoder,
    build_autoencoder,
    embed,
    reconstruction_loss,
    train_stratification_autoencoder,
)
from .covariates import build_covariates, diagnosis_feature, drug_feature, encode_code_sets
from .pipeline import stratify_covariates, stratify_dataset
from .spectral import canonical_labels, jacobi_eigh, normalized_laplacian, rbf_affinity, spectral_cluster
from .tsne import TsneResult, tsne

__all__ = [
    "StratificationAutoencoder",
    "TsneResult",
    "build_autoencoder",
    "build_covariates",
    "canonical_labels",
    "diagnosis_feature",
    "drug_feature",
    "embed",
    "encode_code_sets",
    "jacobi_eigh",
    "normalized_laplacian",
    "rbf_affinity",
    "reconstruction_loss",
    "spectral_cluster",
    "stratify_covariates",
    "stratify_dataset",
    "train_stratification_autoencoder",
    "tsne",
]
