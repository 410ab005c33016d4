from abc import ABC, abstractmethod
from enum import Enum, auto


class ConfigFile(ABC):
    """Abstract class for config file format bookkeeper
    """
    def __init__(self, file: str, section: str):
        self.file = file
        self.section = section

    @abstractmethod
    def load(self):
        raise NotImplementedError


class RunType(Enum):
    """Run types (one training run per preset)
    """
    SINGLE = auto()


class ExperimentType(Enum):
    """Learning setting of a preset
    """
    SUPERVISED = auto()
    NODE = auto()
