"""
Command bodies
- train (single training run from a preset)
- evaluate (checkpoint accuracy on one split)
- graph_info (edge list statistics and Laplacian checks)
- fisher (Fisher information diagnostics at one sample)
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from gdlkit.autodiff import ops
from gdlkit.datasets.cifar import load_cifar10
from gdlkit.datasets.cora import load_cora_dir
from gdlkit.datasets.karate import karate_club
from gdlkit.datasets.mnist import load_mnist_dir
from gdlkit.datasets.splits import GraphDataset, SplitDataset
from gdlkit.datasets.toy import toy_blobs
from gdlkit.exceptions import DatasetError, ShapeMismatch
from gdlkit.global_vars import (
    COVARIANCE_TOL,
    DATA_DIR_ENV_VAR,
    EXPECTATION_TOL,
    HESSIAN_TOL,
    MAX_HESSIAN_PARAMS,
)
from gdlkit.graphs.graph import Orientation
from gdlkit.graphs.graph_io import read_edge_list, write_edge_list
from gdlkit.graphs.heat import heat_step
from gdlkit.graphs.matrices import (
    connected_components,
    diffusive_laplacian,
    incidence,
    laplacian,
    laplacian_spectrum,
)
from gdlkit.infogeo.fisher import FisherReport, NodeScoreModel, fisher_matrix, fisher_rank, write_fisher_report
from gdlkit.layers.checkpoint import load_checkpoint
from gdlkit.losses.classification import LabeledBatch, cross_entropy_loss
from gdlkit.schemas.arch_spec import ArchSpec, Built, build_model
from gdlkit.schemas.hyper_params import DatasetParams, ModelParams, RunConfig
from gdlkit.schemas.yml_config import ConfigYAML, default_config_file
from gdlkit.training.init import make_rng
from gdlkit.training.metrics import FisherTrace, MetricsLog
from gdlkit.training.trainer import TrainResult, evaluate_accuracy, train_node_classifier, train_supervised
from gdlkit.utils.ckpt_json import CheckpointMeta
from gdlkit.utils.logger import setup_logger
from gdlkit.utils.pretty_print import pad_print, print_params, print_run_header, print_table, str_print

logger = logging.getLogger(__name__)

Dataset = Union[SplitDataset, GraphDataset]

# preset picked when only --dataset is given
DEFAULT_PRESETS = {
    "karate": "karate",
    "cora": "cora_gat",
    "mnist": "mnist_mlp",
    "cifar10": "cifar10_mlp",
    "toy": "toy",
}


class ExperimentPaths:
    """Output files of one command: <out>/<command>/<dataset>/<arch-tag>/"""
    def __init__(self, out_dir: Union[str, Path], command: str, dataset: str, arch_tag: str) -> None:
        self.results_dir = Path(out_dir)
        self.exp_results_dir = self.results_dir / command / dataset / arch_tag
        self.exp_results_dir.mkdir(parents=True, exist_ok=True)

    def get_filepath(self, filename: str) -> Path:
        return self.exp_results_dir / filename

    @property
    def metrics(self) -> Path:
        return self.get_filepath("metrics.csv")

    @property
    def checkpoint(self) -> Path:
        return self.get_filepath("model.gdl")

    @property
    def log(self) -> Path:
        return self.get_filepath("run.log")

    @property
    def fisher(self) -> Path:
        return self.get_filepath("fisher.csv")

    @property
    def fisher_trace(self) -> Path:
        return self.get_filepath("fisher_trace.csv")


"""
Configuration and data
"""
def resolve_config(command: str, config_file: Optional[str], config_section: Optional[str],
                   dataset: Optional[str], overrides: Dict[str, Any], out_dir: Union[str, Path]) -> RunConfig:
    """Preset section merged with command-line overrides

    Without a section, the preset is picked from the dataset name.
    """
    config_file = config_file or default_config_file()
    if config_section is None:
        config_section = DEFAULT_PRESETS.get(dataset or "karate", "karate")
    if dataset is not None:
        overrides = dict(overrides)
        overrides.setdefault("dataset", {})["name"] = dataset
    preset = ConfigYAML.from_section(config_file, config_section, overrides)
    return RunConfig(
        command=command,
        config_file=str(config_file),
        config_section=config_section,
        kind=preset.EXPTYPE.name,
        dataset=preset.dataset_params,
        model=preset.model_params,
        optimizer=preset.optimizer_config,
        out_dir=str(out_dir),
    )


def _data_dir(params: DatasetParams) -> Path:
    data_dir = params.data_dir or os.environ.get(DATA_DIR_ENV_VAR)
    if not data_dir:
        raise DatasetError(f"{params.name} needs --data_dir or the {DATA_DIR_ENV_VAR} environment variable")
    return Path(data_dir)


def _subdir(data_dir: Path, *names: str) -> Path:
    for name in names:
        if (data_dir / name).is_dir():
            return data_dir / name
    return data_dir


def load_data(params: DatasetParams, seed: int) -> Dataset:
    """Load the named dataset with splits drawn from seed"""
    if params.name == "karate":
        return karate_club(seed, params.train_nodes)
    if params.name == "toy":
        return toy_blobs(seed=seed)
    if params.name == "cora":
        return load_cora_dir(_data_dir(params), seed, params.normalize_features)
    if params.name == "mnist":
        return load_mnist_dir(_subdir(_data_dir(params), "mnist", "MNIST"), params.val_fraction, seed,
                              params.raw_pixels)
    if params.name == "cifar10":
        root = _subdir(_data_dir(params), "cifar-10-batches-bin", "cifar10")
        batches = sorted(root.glob("data_batch_*.bin")) + sorted(root.glob("test_batch*.bin"))
        if not batches:
            raise DatasetError(f"no CIFAR-10 batch files under {root}")
        return load_cifar10(batches, params.raw_pixels)
    raise DatasetError(f"unknown dataset {params.name!r}")


def _check_fits(spec: ArchSpec, model: Built, data: Dataset) -> None:
    if isinstance(data, GraphDataset):
        if not spec.is_graph:
            raise ShapeMismatch(f"{spec} is not a graph model, {data.name} is a graph dataset")
        dim, num_classes = data.features.shape[1], data.num_classes
    else:
        if spec.is_graph:
            raise ShapeMismatch(f"{spec} is a graph model, {data.name} is not a graph dataset")
        dim, num_classes = data.dim, data.num_classes
    if model.in_dim != dim:
        raise ShapeMismatch(f"{spec} expects {model.in_dim} input features, {data.name} has {dim}")
    if model.out_dim != num_classes:
        raise ShapeMismatch(f"{spec} produces {model.out_dim} scores, {data.name} has {num_classes} classes")


def _build(params: ModelParams) -> Tuple[ArchSpec, Built]:
    return build_model(params.arch, params.activation, params.decoder, params.hidden, params.heads,
                       params.self_loops)


def _fisher_probe(model: Built, data: Dataset, index: int):
    """(classifier, input) pair for Fisher diagnostics at one sample or node"""
    if isinstance(data, GraphDataset):
        if not 0 <= index < data.graph.n_nodes:
            raise ShapeMismatch(f"node {index} outside [0, {data.graph.n_nodes})")
        return NodeScoreModel(model, data.graph, data.features), index
    if not 0 <= index < data.samples.shape[0]:
        raise ShapeMismatch(f"sample {index} outside [0, {data.samples.shape[0]})")
    return model, data.samples[index]


"""
train
"""
def train(cfg: RunConfig, verbose: bool = False) -> TrainResult:
    spec, model = _build(cfg.model)
    paths = ExperimentPaths(cfg.out_dir, cfg.command, cfg.dataset.name, spec.tag)
    setup_logger(paths.log, verbose)
    print_run_header(cfg, {"architecture": str(spec), "num_weights": model.num_weights,
                           "results_dir": paths.exp_results_dir})

    data = load_data(cfg.dataset, cfg.optimizer.seed)
    _check_fits(spec, model, data)
    metrics = MetricsLog(paths.metrics)

    hook = None
    if cfg.optimizer.fisher_every:
        trace = FisherTrace(paths.fisher_trace)
        first = data.mask.train[0] if isinstance(data, GraphDataset) else data.split.train[0]
        probe, x = _fisher_probe(model, data, int(first))

        def hook(epoch: int, step: int) -> None:
            if epoch % cfg.optimizer.fisher_every == 0:
                rank, sigma_max = fisher_rank(probe, x)
                trace.append(epoch=epoch, step=step, rank=rank, sigma_max=sigma_max)

    if isinstance(data, GraphDataset):
        result = train_node_classifier(model, data.graph, data.features, data.labels, data.mask,
                                       cfg.optimizer, metrics, paths.checkpoint, hook)
        class_names = data.class_names
    else:
        result = train_supervised(model, data, cfg.optimizer, metrics, paths.checkpoint, hook)
        class_names = tuple(str(c) for c in range(data.num_classes))

    CheckpointMeta(
        arch=str(spec),
        decoder=cfg.model.decoder,
        activation=cfg.model.activation,
        dataset=cfg.dataset.name,
        class_names=class_names,
        self_loops=cfg.model.self_loops,
        epoch=cfg.optimizer.epochs,
        step=result.state.step,
        extra={"seed": cfg.optimizer.seed, "dataset": cfg.dataset._asdict()},
    ).record_json(paths.checkpoint)

    logging.info(pad_print())
    logging.info(str_print("Result"))
    print_params("Final Metrics", {k: f"{v:.4f}" for k, v in result.summary.items()})
    logging.info(f"metrics    :: {paths.metrics}")
    logging.info(f"checkpoint :: {paths.checkpoint}")
    logging.info(pad_print())
    return result


"""
eval
"""
class LoadedCheckpoint(NamedTuple):
    meta: CheckpointMeta
    spec: ArchSpec
    model: Built
    data: Dataset


def load_trained(checkpoint: Union[str, Path], dataset: Optional[str] = None,
                 data_dir: Optional[str] = None, seed: Optional[int] = None,
                 raw_pixels: Optional[bool] = None) -> LoadedCheckpoint:
    """Rebuild a checkpointed model and reload its dataset

    Dataset options recorded at training time apply unless overridden.

    :raises BadCheckpoint: if the weights file or its sidecar is unreadable
    :raises ShapeMismatch: if the weights or the dataset do not fit the model
    """
    meta = CheckpointMeta.from_json(checkpoint)
    spec, model = build_model(meta.arch, meta.activation, meta.decoder, self_loops=meta.self_loops)
    load_checkpoint(model, checkpoint)

    recorded = dict(meta.extra.get("dataset", {"name": meta.dataset}))
    if recorded.get("train_nodes") is not None:
        recorded["train_nodes"] = tuple(recorded["train_nodes"])
    params = DatasetParams(**recorded)
    if dataset is not None and dataset != params.name:
        params = DatasetParams(name=dataset)
    params = params._replace(
        data_dir=data_dir if data_dir is not None else params.data_dir,
        raw_pixels=raw_pixels if raw_pixels is not None else params.raw_pixels,
    )
    data = load_data(params, seed if seed is not None else int(meta.extra.get("seed", 0)))
    _check_fits(spec, model, data)
    if isinstance(data, GraphDataset) and meta.class_names and meta.dataset == data.name:
        data = _align_classes(data, meta.class_names)
    return LoadedCheckpoint(meta, spec, model, data)


def _align_classes(data: GraphDataset, class_names) -> GraphDataset:
    """Relabel nodes so class indices follow the checkpoint's mapping"""
    if tuple(class_names) == data.class_names:
        return data
    if set(class_names) != set(data.class_names):
        raise ShapeMismatch(f"checkpoint classes {list(class_names)} differ from {data.name} classes {list(data.class_names)}")
    index = {name: c for c, name in enumerate(class_names)}
    remap = np.asarray([index[name] for name in data.class_names], dtype=np.int64)
    return data._replace(labels=remap[data.labels], class_names=tuple(class_names))


def evaluate(checkpoint: Union[str, Path], split: str = "val", dataset: Optional[str] = None,
             data_dir: Optional[str] = None, seed: Optional[int] = None,
             raw_pixels: Optional[bool] = None, verbose: bool = False) -> Tuple[float, float]:
    """(loss, accuracy) of a checkpoint on one split; weights are never written"""
    setup_logger(None, verbose)
    loaded = load_trained(checkpoint, dataset, data_dir, seed, raw_pixels)
    data = loaded.data
    if isinstance(data, GraphDataset):
        scores = ops.lift(loaded.model.forward(data.graph, ops.lift(data.features)).value)
        idx = data.mask.get(split)
        labels = data.labels
    else:
        scores = ops.lift(loaded.model.forward(ops.lift(data.samples)).value)
        idx = data.split.get(split)
        labels = data.labels
    accuracy = evaluate_accuracy(scores, labels, idx)
    loss = cross_entropy_loss(LabeledBatch.of(ops.take_rows(scores, idx), labels[idx])).item()

    logging.info(pad_print())
    logging.info(str_print(f"eval {loaded.spec} on {data.name}"))
    print_params("Evaluation", {
        "checkpoint": checkpoint,
        "split": split,
        "samples": int(idx.size),
        "loss": f"{loss:.4f}",
        "accuracy": f"{accuracy:.4f}",
    })
    logging.info(pad_print())
    return loss, accuracy


"""
graph-info
"""
class GraphInfo(NamedTuple):
    n_nodes: int
    n_edges: int
    components: int
    spectrum: np.ndarray
    factorization_ok: bool
    heat_ok: Optional[bool]


def graph_info(edge_list: Optional[Union[str, Path]] = None, dataset: Optional[str] = None,
               seed: int = 0, export: Optional[Union[str, Path]] = None,
               verbose: bool = False, data_dir: Optional[str] = None) -> GraphInfo:
    """Describe a graph and check L = D - A = X^T X under two random orientations"""
    setup_logger(None, verbose)
    if edge_list is not None:
        g = read_edge_list(edge_list)
        source = str(edge_list)
    elif dataset is not None:
        g = load_data(DatasetParams(name=dataset, data_dir=data_dir), seed).graph
        source = dataset
    else:
        raise DatasetError("graph-info needs an edge list file or a graph dataset")
    if export is not None:
        write_edge_list(g, export)
        logger.info(f"wrote edge list to {export}")

    logging.info(pad_print())
    logging.info(str_print(f"graph {source}"))
    n_components, _ = connected_components(g)
    print_params("Graph", {"nodes": g.n_nodes, "edges": g.num_edges, "components": n_components,
                           "isolated nodes": len(g.isolated_nodes())})

    degrees = pd.Series(g.degrees).value_counts().sort_index()
    print_table(list(degrees.items()), ["degree", "count"], title="degree histogram")

    L = laplacian(g)
    spectrum = laplacian_spectrum(g)
    if g.n_nodes <= 12:
        print_table([[f"{v:g}" for v in row] for row in L], [str(j) for j in range(g.n_nodes)], title="L = D - A")
        print_table([[k, lam] for k, lam in enumerate(spectrum)], ["k", "eigenvalue"], title="spectrum of L")
    else:
        zero = int(np.sum(np.abs(spectrum) < 1e-9 * max(1.0, spectrum[-1])))
        print_params("Spectrum of L", {
            "lambda_min": f"{spectrum[0]:.6g}",
            "lambda_2": f"{spectrum[1]:.6g}" if spectrum.size > 1 else "-",
            "lambda_max": f"{spectrum[-1]:.6g}",
            "zero multiplicity": zero,
        })

    rng = make_rng(seed, stream=2)
    checks = []
    for _ in range(2):
        X = incidence(g, Orientation.random(g, rng))
        checks.append(np.array_equal(X.T @ X, L))
    factorization_ok = all(checks)
    logging.info(f"L == X^T X under two random orientations :: {'PASS' if factorization_ok else 'FAIL'}")

    heat_ok = None
    if g.n_nodes and g.isolated_nodes().size == 0:
        h = rng.normal(size=g.n_nodes)
        heat_ok = bool(np.allclose(heat_step(g, h), h - diffusive_laplacian(g) @ h, rtol=0.0, atol=1e-12))
        logging.info(f"heat step == (I - L_d) h                  :: {'PASS' if heat_ok else 'FAIL'}")
    logging.info(pad_print())
    return GraphInfo(g.n_nodes, g.num_edges, n_components, spectrum, factorization_ok, heat_ok)


"""
fisher
"""
def fisher_residuals_ok(report: FisherReport) -> bool:
    limits = {"expectation": EXPECTATION_TOL, "covariance": COVARIANCE_TOL, "hessian": HESSIAN_TOL}
    return all(report.residuals.get(name) is None or report.residuals[name] <= tol
               for name, tol in limits.items())


def fisher(checkpoint: Union[str, Path], sample_index: int = 0, out_dir: Union[str, Path] = "results",
           dataset: Optional[str] = None, data_dir: Optional[str] = None, seed: Optional[int] = None,
           raw_pixels: Optional[bool] = None, verbose: bool = False) -> Tuple[FisherReport, bool]:
    """Fisher matrix diagnostics of a checkpoint at one sample (or node)"""
    setup_logger(None, verbose)
    loaded = load_trained(checkpoint, dataset, data_dir, seed, raw_pixels)
    paths = ExperimentPaths(out_dir, "fisher", loaded.data.name, loaded.spec.tag)
    setup_logger(paths.log, verbose)

    probe, x = _fisher_probe(loaded.model, loaded.data, sample_index)
    report = fisher_matrix(probe, x, hessian=loaded.model.num_weights <= MAX_HESSIAN_PARAMS)
    write_fisher_report(report, paths.fisher)
    ok = fisher_residuals_ok(report)

    logging.info(pad_print())
    logging.info(str_print(f"fisher {loaded.spec} at sample {sample_index}"))
    print_params("Fisher", {
        "parameters": report.num_params,
        "classes": report.num_classes,
        "numerical rank": report.numerical_rank,
        "sigma_max": f"{report.sigma_max:.6g}",
    })
    print_table(
        [[name, "skipped" if value is None else f"{value:.3e}"] for name, value in sorted(report.residuals.items())],
        ["identity", "residual"],
        title="identity residuals",
    )
    logging.info(f"residuals within tolerance :: {'PASS' if ok else 'FAIL'}")
    logging.info(f"report     :: {paths.fisher}")
    logging.info(pad_print())
    return report, ok
