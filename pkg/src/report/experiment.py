"""End-to-end experiment on simulated cohorts.

Per seed: simulate -> preprocess -> stratify -> train totalGAN and one
subGAN per cluster -> compare -> random-cluster baseline -> oracle and DLE.
Per-seed artifacts go to `seed-<S>/` as soon as each stage finishes, so a
failing stage leaves everything before it on disk.
"""

import logging
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from ..cohortsim import oracle_report, simulate_cohort, write_cohort
from ..evaluate import compare_models_with_sets, dle_test, random_cluster_baseline
from ..exceptions import StageError, ZeroVarianceError
from ..files import write_dataset, write_model, write_rows
from ..gan import GanModel, save_model, train_gan, write_loss_curves
from ..models.config import ExperimentConfig, GanTrainConfig
from ..models.reports import (
    ClusterAssignment,
    ComparisonReport,
    DleReport,
    ExperimentSummary,
    SeedResult,
    TableRow,
)
from ..models.series import Dataset, Provenance
from ..preprocess import preprocess_pipeline
from ..stratify import stratify_dataset
from ..utils.output import dumps_json
from ..utils.seeding import derive_seed
from .figures import ClusterFigureData, FigureInputs, emit_figures

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
TABLE_FILE = "table1.csv"
SEED_TABLE_FILE = "table1_seeds.csv"
TABLE_COLUMNS = ["cluster", "variant", "seed", "size", "sub_p_err", "sub_sd", "total_p_err", "total_sd", "p_value"]

StageCallback = Callable[[int, str], None]


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Wrap any failure inside a stage into StageError(name, cause)."""
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


def align_clusters(assignment: ClusterAssignment, dataset: Dataset) -> ClusterAssignment:
    """Renumber clusters by ascending mean normalized level.

    Cluster ids from different seeds then refer to comparable groups.
    """
    matrix = dataset.matrix()
    by_id = {pid: i for i, pid in enumerate(dataset.patient_ids)}
    labels = np.asarray(assignment.labels)
    rows = np.array([by_id[pid] for pid in assignment.patient_ids])
    levels = [float(matrix[rows[labels == c]].mean()) for c in range(assignment.k)]
    rank = {int(old): new for new, old in enumerate(np.argsort(levels, kind="stable"))}
    return assignment.model_copy(update={"labels": tuple(rank[int(c)] for c in labels)})


def _gan_config(base: GanTrainConfig, seed: int, *keys: int | str) -> GanTrainConfig:
    return base.model_copy(update={"seed": derive_seed(seed, *keys)})


def _train_subgans(
    dataset: Dataset,
    members: list[list[int]],
    config: GanTrainConfig,
    seed: int,
    workers: int,
) -> list[GanModel]:
    """One GAN per cluster; results come back in cluster order whatever the worker count."""

    def train(c: int) -> GanModel:
        logger.info("training subGAN for cluster %d (%d series)", c, len(members[c]))
        subset = dataset.subset(members[c])
        return train_gan(subset.series, _gan_config(config, seed, "sub-gan", c), dataset.bounds, dataset.n_pre)

    if workers <= 1:
        return [train(c) for c in range(len(members))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(train, range(len(members))))


def _row(report: ComparisonReport, variant: str, seed: int) -> TableRow:
    return TableRow(
        cluster=report.cluster_id,
        variant=variant,  # type: ignore[arg-type]
        seed=seed,
        size=report.sub.n_real,
        sub_p_err=report.sub.p_err,
        sub_sd=report.sub.sd,
        total_p_err=report.total.p_err,
        total_sd=report.total.sd,
        p_value=report.p_value,
    )


def _cluster_dle(dataset: Dataset, members: list[int]) -> DleReport | None:
    if len(members) < 2:
        return None
    try:
        return dle_test(dataset.subset(members).series, dataset.bounds)
    except ZeroVarianceError:
        return None


def run_seed(
    cfg: ExperimentConfig,
    seed: int,
    out_dir: Path,
    workers: int = 1,
    with_figures: bool = False,
) -> SeedResult:
    """Run every stage for one seed and write its artifacts into out_dir.

    Raises:
        StageError: Naming the failing stage
    """
    out_dir.mkdir(parents=True, exist_ok=True)

    with stage("simulate"):
        cohort = simulate_cohort(cfg.sim.model_copy(update={"seed": seed}))
        write_cohort(cohort, out_dir / "cohort")

    with stage("preprocess"):
        dataset = preprocess_pipeline(
            cohort.observations,
            cohort.prescriptions,
            cfg.preprocess,
            diagnoses=cohort.diagnoses,
            provenance=Provenance(kind="simulated", seed=seed),
        )
        write_dataset(dataset, out_dir / "dataset.json")

    with stage("stratify"):
        strat = stratify_dataset(dataset, cfg.stratify.model_copy(update={"seed": seed}))
        assignment = align_clusters(strat.assignment, dataset)
        strat = strat.model_copy(update={"assignment": assignment})
        write_model(strat, "clusters", out_dir / "clusters.json")
    members = [assignment.members(c) for c in range(assignment.k)]
    sizes = [len(m) for m in members]
    largest = max(sizes)

    with stage("train"):
        total_model = train_gan(dataset.series, _gan_config(cfg.gan, seed, "total-gan"), dataset.bounds, dataset.n_pre)
        save_model(total_model, out_dir / "models" / "total.json")
        write_loss_curves(total_model.log, out_dir / "models" / "total_losses.csv")
        sub_models = _train_subgans(dataset, members, cfg.sub_gan(), seed, workers)
        for c, model in enumerate(sub_models):
            save_model(model, out_dir / "models" / f"cluster-{c}.json")
            write_loss_curves(model.log, out_dir / "models" / f"cluster-{c}_losses.csv")

    figure_clusters = []
    clinical: list[ComparisonReport] = []
    with stage("compare"):
        matrix = dataset.matrix()
        for c, model in enumerate(sub_models):
            real = matrix[members[c]]
            report, sub_synth, total_synth = compare_models_with_sets(
                real,
                model,
                total_model,
                largest,
                derive_seed(seed, "compare", c),
                cluster_id=c,
                oversample_factor=cfg.oversample_factor,
            )
            clinical.append(report)
            write_model(report, "comparison", out_dir / "comparisons" / f"cluster-{c}.json")
            figure_clusters.append(
                ClusterFigureData(c, real, sub_synth, total_synth, report.sub, report.total)
            )

    random: list[ComparisonReport] = []
    if cfg.random_baseline:
        with stage("random-baseline"):
            sub_cfg = cfg.sub_gan()

            def trainer(subset: np.ndarray, i: int) -> GanModel:
                return train_gan(subset, _gan_config(sub_cfg, seed, "random-gan", i), dataset.bounds, dataset.n_pre)

            random = random_cluster_baseline(
                matrix,
                sizes,
                trainer,
                total_model,
                largest,
                derive_seed(seed, "random"),
                oversample_factor=cfg.oversample_factor,
            )
            for report in random:
                write_model(report, "comparison", out_dir / "comparisons" / f"random-{report.cluster_id}.json")

    with stage("oracle"):
        oracle = oracle_report(cohort.truth, assignment, dataset)
        write_model(oracle, "oracle", out_dir / "oracle.json")

    with stage("dle"):
        dle = dle_test(dataset.series, dataset.bounds)
        dle_normalized = dle_test(dataset.series)
        cluster_dle = [_cluster_dle(dataset, m) for m in members]

    if with_figures:
        with stage("figures"):
            included = set(dataset.patient_ids)
            emit_figures(
                FigureInputs(
                    coordinates=np.asarray(strat.coordinates),
                    labels=list(assignment.labels),
                    raw_values=np.array(
                        [o.value for o in cohort.observations if o.patient_id in included]
                    ),
                    bounds=dataset.bounds,
                    total=matrix,
                    n_pre=dataset.n_pre,
                    clusters=figure_clusters,
                    seed=seed,
                ),
                out_dir.parent / "figures",
            )

    return SeedResult(
        seed=seed,
        n_simulated=cfg.sim.n_patients,
        n_included=len(dataset.series),
        cluster_sizes=sizes,
        clinical=[_row(r, "clinical", seed) for r in clinical],
        random=[_row(r, "random", seed) for r in random],
        oracle=oracle,
        dle=dle,
        dle_normalized=dle_normalized,
        cluster_dle=cluster_dle,
    )


def _median(values: list[float]) -> float:
    return float(np.median(values))


def median_rows(results: list[SeedResult]) -> list[TableRow]:
    """Median of every numeric column across seeds, per (variant, cluster).

    Clinical rows come first, each variant sorted by cluster. A p-value is
    the median of the seeds that have one.
    """
    rows: list[TableRow] = []
    for variant in ("clinical", "random"):
        grouped: dict[int, list[TableRow]] = {}
        for result in results:
            for row in result.clinical if variant == "clinical" else result.random:
                grouped.setdefault(row.cluster, []).append(row)
        for cluster in sorted(grouped):
            group = grouped[cluster]
            p_values = [r.p_value for r in group if r.p_value is not None]
            rows.append(
                TableRow(
                    cluster=cluster,
                    variant=variant,  # type: ignore[arg-type]
                    seed=None,
                    size=int(round(_median([r.size for r in group]))),
                    sub_p_err=_median([r.sub_p_err for r in group]),
                    sub_sd=_median([r.sub_sd for r in group]),
                    total_p_err=_median([r.total_p_err for r in group]),
                    total_sd=_median([r.total_sd for r in group]),
                    p_value=_median(p_values) if p_values else None,
                )
            )
    return rows


def run_experiment(
    cfg: ExperimentConfig,
    workers: int = 1,
    on_stage: StageCallback | None = None,
) -> ExperimentSummary:
    """Run every seed, aggregate, and write summary.json and the comparison tables.

    Args:
        cfg: Experiment configuration; artifacts go under cfg.output_dir
        workers: Threads for per-cluster GAN training; results do not depend on it
        on_stage: Called with (seed, "start") before each seed

    Returns:
        ExperimentSummary, also written to summary.json

    Raises:
        StageError: If any stage of any seed fails
    """
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for i, seed in enumerate(cfg.seeds):
        if on_stage is not None:
            on_stage(seed, "start")
        logger.info("experiment seed %d (%d of %d)", seed, i + 1, len(cfg.seeds))
        results.append(run_seed(cfg, seed, out / f"seed-{seed}", workers, with_figures=cfg.figures and i == 0))

    summary = ExperimentSummary(config=cfg.describe(), seeds=results, table=median_rows(results))
    (out / SUMMARY_FILE).write_text(dumps_json(summary.model_dump(mode="json")))
    write_rows([r.model_dump(mode="json") for r in summary.table], out / TABLE_FILE, TABLE_COLUMNS)
    write_rows(
        [r.model_dump(mode="json") for s in results for r in s.clinical + s.random],
        out / SEED_TABLE_FILE,
        TABLE_COLUMNS,
    )
    return summary
