import pytest
import yaml

from gdlkit.exceptions import ArchitectureError, ConfigError
from gdlkit.gnn.encoder_decoder import EncoderDecoder
from gdlkit.gnn.gat import GatLayer
from gdlkit.gnn.message_passing import MPVariant
from gdlkit.layers.activations import TANH
from gdlkit.layers.model import Model
from gdlkit.schemas.arch_spec import build_model, parse_architecture
from gdlkit.schemas.hyper_params import OptimizerConfig
from gdlkit.schemas.yml_config import (
    ConfigYAML,
    NodeConfigYAML,
    SupervisedConfigYAML,
    default_config_file,
    list_sections,
)


def write_preset(path, section, body):
    path.write_text(yaml.safe_dump({section: body}))
    return str(path)


"""
Architecture strings
"""
@pytest.mark.parametrize("text", [
    "linear:784-10",
    "mlp:784-500-10",
    "cnn:28x28-c4k5-p2-10",
    "cnn:8x8-c2k3-5-4",
    "gcn:34-4-4-2",
    "sage:5-3",
    "mp:4-4",
    "gat:1433-8x8-7",
])
def test_architecture_round_trip(text):
    assert str(parse_architecture(text)) == text


def test_parsed_fields():
    spec = parse_architecture(" MLP:784-500-10 ")
    assert (spec.family, spec.dims, spec.hidden) == ("mlp", (784, 500, 10), (500,))
    assert spec.tag == "mlp_784-500-10" and not spec.is_graph

    conv = parse_architecture("cnn:28x28-c4k5-p2-10")
    assert (conv.image, conv.channels, conv.kernel, conv.pool, conv.dims) == ((28, 28), 4, 5, 2, (784, 10))

    gat = parse_architecture("gat:1433-8x8-16-7")
    assert gat.heads == (8, 1) and gat.hidden == (8, 16) and gat.is_graph


@pytest.mark.parametrize("text", [
    "foo:1-2",
    "mlp",
    "mlp:4",
    "mlp:4-0-3",
    "mlp:4-x-3",
    "linear:4-5-3",
    "cnn:28x28-10",
    "cnn:28x28-c4k30-10",
    "cnn:28x28-c4k4-p2-10",
    "cnn:28x28-c4k5",
    "gat:5",
])
def test_malformed_architectures(text):
    with pytest.raises(ArchitectureError):
        parse_architecture(text)


def test_overrides():
    assert str(parse_architecture("mlp:4-8-3").with_overrides(hidden=[16, 16])) == "mlp:4-16-16-3"
    assert str(parse_architecture("linear:4-3").with_overrides(hidden=[])) == "mlp:4-3"
    gat = parse_architecture("gat:10-8x8-7")
    assert str(gat.with_overrides(hidden=[4, 4])) == "gat:10-8x4-8x4-7"
    assert gat.with_overrides(heads=[3]).heads == (3,)
    with pytest.raises(ArchitectureError):
        parse_architecture("linear:4-3").with_overrides(hidden=[8])
    with pytest.raises(ArchitectureError):
        parse_architecture("mlp:4-8-3").with_overrides(heads=[2])
    with pytest.raises(ArchitectureError):
        gat.with_overrides(heads=[2, 2])
    with pytest.raises(ArchitectureError):
        parse_architecture("mlp:4-8-3").with_overrides(hidden=[0])


def test_build_dense_models():
    spec, model = build_model("mlp:4-8-3", "tanh")
    assert isinstance(model, Model)
    assert model.num_weights == 4 * 8 + 8 + 8 * 3 + 3
    assert [act for _, act in model.layers] == [TANH, None]
    _, conv = build_model("cnn:8x8-c2k3-p2-4")
    assert conv.out_dim == 4
    with pytest.raises(ArchitectureError):
        build_model("mlp:4-3", decoder="linear:3-2")
    with pytest.raises(ArchitectureError):
        build_model("mlp:4-3", activation="swish")


def test_build_graph_models():
    _, model = build_model("gcn:34-4-4-2", "tanh", decoder="linear:2-4")
    assert isinstance(model, EncoderDecoder)
    assert [layer.variant for layer in model.encoder] == [MPVariant.KIPF_WELLING] * 3
    # with a decoder the embedding layer keeps its activation
    assert model.encoder[-1].activation == TANH
    assert model.out_dim == 4

    _, bare = build_model("sage:5-6-3", "relu")
    assert bare.encoder[-1].activation is None

    _, gat = build_model("gat:20-8x8-7", "elu", self_loops=True)
    first, last = gat.encoder
    assert isinstance(first, GatLayer) and first.out_dim == 64 and first.self_loops
    assert last.heads == 1 and last.out_dim == 7 and last.activation is None

    with pytest.raises(ArchitectureError):
        build_model("gcn:34-4-2", decoder="linear:3-4")
    with pytest.raises(ArchitectureError):
        build_model("gcn:34-4-2", decoder="gcn:2-4")


"""
Presets
"""
def test_shipped_presets():
    sections = list_sections(default_config_file())
    assert {"karate", "cora_gat", "mnist_linear", "mnist_mlp", "mnist_cnn", "cifar10_mlp", "toy"} <= set(sections)


@pytest.mark.parametrize("section", list_sections(default_config_file()))
def test_every_preset_validates_and_builds(section):
    cfg = ConfigYAML.from_section(default_config_file(), section)
    mp = cfg.model_params
    spec, _ = build_model(mp.arch, mp.activation, mp.decoder, mp.hidden, mp.heads, mp.self_loops)
    assert spec.is_graph == isinstance(cfg, NodeConfigYAML)
    assert cfg.optimizer_config.learning_rate > 0


def test_toy_preset_values():
    cfg = ConfigYAML.from_section(default_config_file(), "toy")
    assert isinstance(cfg, SupervisedConfigYAML)
    assert cfg.dataset_params.name == "toy"
    assert cfg.model_params.arch == "mlp:4-8-3"
    opt = cfg.optimizer_config
    assert (opt.learning_rate, opt.batch_size, opt.epochs, opt.seed) == (0.1, 16, 20, 0)


def test_overrides_merge_before_validation():
    cfg = ConfigYAML.from_section(default_config_file(), "karate",
                                  {"optimizer": {"epochs": 3, "seed": None}, "dataset": {"train_nodes": [0, 33]}})
    assert cfg.optimizer_config.epochs == 3
    assert cfg.optimizer_config.seed == 7
    assert cfg.dataset_params.train_nodes == (0, 33)


@pytest.mark.parametrize("overrides", [
    {"optimizer": {"batch_size": 0}},
    {"optimizer": {"learning_rate": 0.0}},
    {"dataset": {"name": "imagenet"}},
    {"model": {"depth": 3}},
    {"optimizer": {"epochs": "many"}},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        ConfigYAML.from_section(default_config_file(), "toy", overrides).optimizer_config


def test_node_preset_needs_a_graph_dataset(tmp_path):
    body = {
        "run": "SINGLE",
        "type": "NODE",
        "attribute": {"dataset": {"name": "mnist"}, "model": {"arch": "gcn:784-10"}},
    }
    file = write_preset(tmp_path / "presets.yml", "bad", body)
    with pytest.raises(ConfigError):
        ConfigYAML.from_section(file, "bad")


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        ConfigYAML.from_section(default_config_file(), "no_such_preset")
    with pytest.raises(ConfigError):
        ConfigYAML.from_section(str(tmp_path / "absent.yml"), "toy")
    broken = tmp_path / "broken.yml"
    broken.write_text("toy: [unclosed\n")
    with pytest.raises(ConfigError):
        list_sections(broken)
    file = write_preset(tmp_path / "sweep.yml", "sweep", {"run": "SWEEP", "type": "SUPERVISED"})
    with pytest.raises(ConfigError):
        ConfigYAML.from_section(file, "sweep")


"""
Optimizer records
"""
def test_learning_rate_schedule():
    opt = OptimizerConfig(learning_rate=0.1, lr_decay_factor=0.5, lr_decay_every=2)
    assert [opt.lr_at(e) for e in (0, 1, 2, 5)] == pytest.approx([0.1, 0.1, 0.05, 0.025])
    assert OptimizerConfig(learning_rate=0.3).lr_at(100) == 0.3


@pytest.mark.parametrize("fields", [
    {"learning_rate": -1.0},
    {"batch_size": 0},
    {"epochs": -1},
    {"threads": 0},
    {"weight_decay": -0.1},
])
def test_optimizer_validation(fields):
    with pytest.raises(ConfigError):
        OptimizerConfig(**fields).validate()
