"""
Yaml experiment preset parser

A preset section looks like

    karate:
      run: SINGLE
      type: NODE
      attribute:
        dataset: {name: karate}
        model: {arch: "gcn:34-4-4-2", decoder: "linear:2-4", activation: tanh}
        optimizer: {learning_rate: 0.01, epochs: 300, seed: 7}
"""
import copy
import logging
from abc import ABC, abstractmethod
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from cerberus import Validator

from gdlkit.exceptions import ConfigError
from gdlkit.schemas.base_config import ConfigFile, ExperimentType, RunType
from gdlkit.schemas.hyper_params import DatasetParams, ModelParams, OptimizerConfig
from gdlkit.utils.update_dict import update_dict

logger = logging.getLogger(__name__)

DATASETS = ["karate", "cora", "mnist", "cifar10", "toy"]
GRAPH_DATASETS = ["karate", "cora"]


def default_config_file() -> str:
    return str(resources.files("gdlkit") / "configs" / "experiments.yml")


def _load_yaml(file: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(file, 'r') as f:
            data = yaml.load(f, Loader=yaml.FullLoader)
    except FileNotFoundError:
        raise ConfigError(f"config file {file} does not exist")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {file} is not valid yaml: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {file} does not hold named sections")
    return data


def list_sections(file: Union[str, Path]) -> List[str]:
    return list(_load_yaml(file).keys())


_INT_LIST = {'type': 'list', 'schema': {'type': 'integer', 'min': 1}, 'nullable': True}

_ATTRIBUTE_SCHEMA = {
    'dataset': {
        'type': 'dict',
        'required': True,
        'schema': {
            'name': {'type': 'string', 'allowed': DATASETS, 'required': True},
            'data_dir': {'type': 'string', 'nullable': True},
            'raw_pixels': {'type': 'boolean'},
            'val_fraction': {'type': 'number', 'min': 0.0, 'max': 0.99},
            'normalize_features': {'type': 'boolean'},
            'train_nodes': {'type': 'list', 'schema': {'type': 'integer', 'min': 0}, 'nullable': True},
        },
    },
    'model': {
        'type': 'dict',
        'required': True,
        'schema': {
            'arch': {'type': 'string', 'required': True},
            'decoder': {'type': 'string'},
            'activation': {'type': 'string'},
            'hidden': _INT_LIST,
            'heads': _INT_LIST,
            'self_loops': {'type': 'boolean'},
        },
    },
    'optimizer': {
        'type': 'dict',
        'schema': {
            'learning_rate': {'type': 'number', 'min': 0.0},
            'batch_size': {'type': 'integer', 'min': 1},
            'epochs': {'type': 'integer', 'min': 0},
            'seed': {'type': 'integer', 'min': 0},
            'lr_decay_factor': {'type': 'number', 'min': 0.0},
            'lr_decay_every': {'type': 'integer', 'min': 0},
            'weight_decay': {'type': 'number', 'min': 0.0},
            'log_every': {'type': 'integer', 'min': 0},
            'checkpoint_every': {'type': 'integer', 'min': 0},
            'threads': {'type': 'integer', 'min': 1},
            'fisher_every': {'type': 'integer', 'min': 0},
        },
    },
}


class ConfigYAML(ConfigFile, ABC):
    """Validated preset section; overrides are merged before validation

    :param file: yaml file name
    :param section: preset section name
    :param overrides: nested dict merged onto the section's attribute dict
    """

    def __init__(self, file: str, section: str, overrides: Optional[Dict[str, Any]] = None):
        super().__init__(file, section)
        self.config_dict = self.load()
        if overrides:
            self.config_dict['attribute'] = update_dict(self.config_dict.get('attribute', {}), overrides)

        self._validate_run_config(self.config_dict, self.RUN)
        self._validate_type_config(self.config_dict, self.EXPTYPE)
        self._validate_design_config(self.config_dict)

    @property
    @abstractmethod
    def RUN(self) -> RunType:
        raise NotImplementedError

    @property
    @abstractmethod
    def EXPTYPE(self) -> ExperimentType:
        raise NotImplementedError

    @property
    @abstractmethod
    def SCHEMA(self) -> Dict:
        raise NotImplementedError

    def load(self) -> Dict[str, Any]:
        data = _load_yaml(self.file)
        if self.section not in data:
            raise ConfigError(f"{self.file} has no section {self.section!r}; sections: {list(data)}")
        return copy.deepcopy(data[self.section])

    def _validate_run_config(self, data: dict, run_type: RunType):
        if data.get('run') != run_type.name:
            raise ConfigError(f"{self.file}[{self.section}]: expected run {run_type.name}, got {data.get('run')}")

    def _validate_type_config(self, data: dict, exp_type: ExperimentType):
        if data.get('type') != exp_type.name:
            raise ConfigError(f"{self.file}[{self.section}]: expected type {exp_type.name}, got {data.get('type')}")

    def _validate_design_config(self, config_dict: dict):
        v = Validator(self.SCHEMA)
        if not v.validate(config_dict):
            raise ConfigError(f"invalid config {self.file}[{self.section}]: {v.errors}")
        self.config_dict = v.document

    @property
    def attribute(self) -> Dict[str, Any]:
        return self.config_dict['attribute']

    @property
    def dataset_params(self) -> DatasetParams:
        attrs = dict(self.attribute['dataset'])
        if attrs.get('train_nodes') is not None:
            attrs['train_nodes'] = tuple(attrs['train_nodes'])
        return DatasetParams(**attrs)

    @property
    def model_params(self) -> ModelParams:
        attrs = dict(self.attribute['model'])
        for key in ('hidden', 'heads'):
            if attrs.get(key) is not None:
                attrs[key] = tuple(attrs[key])
        return ModelParams(**attrs)

    @property
    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(**self.attribute.get('optimizer', {})).validate()

    @classmethod
    def get_config_cls(cls, config_file: str, config_section: str) -> type:
        """Preset class matching the section's run and type keys"""
        data = _load_yaml(config_file)
        if config_section not in data:
            raise ConfigError(f"{config_file} has no section {config_section!r}; sections: {list(data)}")
        raw_config = data[config_section]
        if raw_config.get('run') == 'SINGLE' and raw_config.get('type') == 'SUPERVISED':
            return SupervisedConfigYAML
        elif raw_config.get('run') == 'SINGLE' and raw_config.get('type') == 'NODE':
            return NodeConfigYAML
        else:
            raise ConfigError(
                f"{config_file}[{config_section}]: unsupported run/type {raw_config.get('run')}/{raw_config.get('type')}"
            )

    @classmethod
    def from_section(cls, config_file: str, config_section: str,
                     overrides: Optional[Dict[str, Any]] = None) -> "ConfigYAML":
        return cls.get_config_cls(config_file, config_section)(config_file, config_section, overrides)


class SupervisedConfigYAML(ConfigYAML):
    """Minibatch training on a sample dataset (MNIST, CIFAR-10, toy blobs)"""
    RUN = RunType.SINGLE
    EXPTYPE = ExperimentType.SUPERVISED

    SCHEMA = {
        'run': {'type': 'string', 'allowed': ['SINGLE'], 'required': True},
        'type': {'type': 'string', 'allowed': ['SUPERVISED'], 'required': True},
        'description': {'type': 'string'},
        'attribute': {'type': 'dict', 'required': True, 'schema': _ATTRIBUTE_SCHEMA},
    }


class NodeConfigYAML(ConfigYAML):
    """Full-graph semi-supervised node classification (Karate club, Cora)"""
    RUN = RunType.SINGLE
    EXPTYPE = ExperimentType.NODE

    SCHEMA = {
        'run': {'type': 'string', 'allowed': ['SINGLE'], 'required': True},
        'type': {'type': 'string', 'allowed': ['NODE'], 'required': True},
        'description': {'type': 'string'},
        'attribute': {'type': 'dict', 'required': True, 'schema': _ATTRIBUTE_SCHEMA},
    }

    def _validate_design_config(self, config_dict: dict):
        super()._validate_design_config(config_dict)
        name = self.config_dict['attribute']['dataset']['name']
        if name not in GRAPH_DATASETS:
            raise ConfigError(f"{self.file}[{self.section}]: node classification needs a graph dataset, got {name}")
