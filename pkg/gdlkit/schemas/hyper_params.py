"""
Hyperparameter records
"""
from typing import NamedTuple, Optional, Tuple

from gdlkit.exceptions import ConfigError


class OptimizerConfig(NamedTuple):
    """SGD hyperparameters.

    lr_decay_factor multiplies the learning rate every lr_decay_every epochs
    (0 disables decay). *_every cadences of 0 disable the corresponding output.
    """
    learning_rate: float = 0.1
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0
    lr_decay_factor: float = 1.0
    lr_decay_every: int = 0
    weight_decay: float = 0.0
    log_every: int = 1
    checkpoint_every: int = 0
    threads: int = 1
    fisher_every: int = 0

    def validate(self) -> "OptimizerConfig":
        if not self.learning_rate > 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be at least 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epoch count must be nonnegative, got {self.epochs}")
        if self.threads < 1:
            raise ConfigError(f"thread count must be at least 1, got {self.threads}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight decay must be nonnegative, got {self.weight_decay}")
        return self

    def lr_at(self, epoch: int) -> float:
        """Learning rate in effect during the zero-based epoch"""
        if self.lr_decay_every <= 0:
            return self.learning_rate
        return self.learning_rate * self.lr_decay_factor ** (epoch // self.lr_decay_every)


class ModelParams(NamedTuple):
    """Model shape: architecture string, decoder string and overrides."""
    arch: str
    decoder: str = ""
    activation: str = "relu"
    hidden: Optional[Tuple[int, ...]] = None
    heads: Optional[Tuple[int, ...]] = None
    self_loops: bool = False


class DatasetParams(NamedTuple):
    """Dataset selection."""
    name: str
    data_dir: Optional[str] = None
    raw_pixels: bool = False
    val_fraction: float = 0.1
    normalize_features: bool = False
    train_nodes: Optional[Tuple[int, ...]] = None


class RunConfig(NamedTuple):
    """Everything one command needs."""
    command: str
    config_file: str
    config_section: str
    kind: str
    dataset: DatasetParams
    model: ModelParams
    optimizer: OptimizerConfig
    out_dir: str
