"""Covariates -> autoencoder code -> t-SNE -> spectral clusters."""

import logging

import numpy as np

from ..exceptions import ValidationError
from ..models.config import StratifyConfig
from ..models.reports import StratificationResult
from ..models.series import Dataset
from ..utils.seeding import derive_seed
from .autoencoder import embed, train_stratification_autoencoder
from .spectral import spectral_cluster
from .tsne import tsne

logger = logging.getLogger(__name__)


def stratify_covariates(
    covariates: np.ndarray,
    patient_ids: list[str],
    config: StratifyConfig | None = None,
) -> StratificationResult:
    """Run the whole stratification on an N x V covariate matrix.

    Each stage draws from its own stream derived from config.seed.
    """
    cfg = config or StratifyConfig()
    ae = train_stratification_autoencoder(covariates, derive_seed(cfg.seed, "autoencoder"), cfg.autoencoder)
    if ae.loss_history:
        logger.info("stratification autoencoder trained, final loss %.4f", ae.loss_history[-1])
    codes = embed(ae.encoder, covariates)
    result = tsne(codes, derive_seed(cfg.seed, "tsne"), cfg.tsne)
    assignment = spectral_cluster(
        result.coordinates,
        k=cfg.k,
        seed=derive_seed(cfg.seed, "spectral"),
        patient_ids=patient_ids,
        restarts=cfg.kmeans_restarts,
    )
    logger.info("spectral clustering sizes %s", assignment.sizes())
    return StratificationResult(
        assignment=assignment,
        coordinates=[(float(x), float(y)) for x, y in result.coordinates],
        ae_loss=list(ae.loss_history),
        kl_history=list(result.kl_history),
        seed=cfg.seed,
    )


def stratify_dataset(dataset: Dataset, config: StratifyConfig | None = None) -> StratificationResult:
    """Stratify the patients of a dataset on its covariates.

    Raises:
        ValidationError: If the dataset carries no covariates
    """
    if dataset.covariates is None:
        raise ValidationError("dataset has no covariates; preprocess with diagnoses or pass --covariates")
    return stratify_covariates(dataset.covariate_matrix(), dataset.patient_ids, config)
