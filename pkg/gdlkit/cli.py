"""
Command line interface

Exit codes: 0 success, 1 configuration error, 2 data/shape/checkpoint error,
3 non-finite loss or gradient, 4 a diagnostic check failed.
"""
import functools
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click

import gdlkit.run as gdl_run
from gdlkit.exceptions import GdlError
from gdlkit.global_vars import CHECK_FAILED_EXIT, DATA_DIR_ENV_VAR
from gdlkit.schemas.arch_spec import __doc__ as ARCH_GRAMMAR
from gdlkit.schemas.yml_config import ConfigYAML, default_config_file, list_sections

logger = logging.getLogger(__name__)

_DATASETS = list(gdl_run.DEFAULT_PRESETS)


class _NaturalOrderGroup(click.Group):
    """
    Helper class to display subcommands in natural order
    ref: https://github.com/pallets/click/issues/513
    """
    def list_commands(self, ctx):
        return self.commands.keys()


def _int_tuple(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[Tuple[int, ...]]:
    """Parse "500,200" into (500, 200)"""
    if value is None:
        return None
    try:
        return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _data_options():
    return [
        click.Option(
            ['--dataset'],
            type=click.Choice(_DATASETS),
            default=None,
            help='Dataset id (default: the preset\'s or the checkpoint\'s)'
        ),
        click.Option(
            ['--data_dir'],
            type=click.Path(file_okay=False, dir_okay=True),
            default=None,
            help=f'Dataset directory (default: ${DATA_DIR_ENV_VAR})'
        ),
        click.Option(
            ['--seed'],
            type=int,
            default=None,
            help='Seed for initialization, minibatches and splits (default: preset / checkpoint)'
        ),
        click.Option(
            ['--raw-pixels', 'raw_pixels'],
            is_flag=True,
            default=None,
            help='Keep image pixels as 0-255 instead of scaling to [0, 1]'
        ),
        click.Option(
            ['-v', '--verbose'],
            is_flag=True,
            default=False,
            show_default=True,
            help='Enable verbose output'
        ),
    ]


class GdlDataCommand(click.Command):
    """Command taking the dataset selection options"""
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.params.extend(_data_options())


class GdlCommand(click.Command):
    """Command taking preset, dataset, output and threading options"""
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.params.extend([
            click.Option(
                ['--config_file'],
                type=click.Path(exists=True, file_okay=True, dir_okay=False),
                default=None,
                help='Preset file (default: the bundled experiments.yml)'
            ),
            click.Option(
                ['--config_section'],
                type=str,
                default=None,
                help='Preset section (default: picked from --dataset)'
            ),
            click.Option(
                ['--out'],
                type=click.Path(exists=False, file_okay=False, dir_okay=True),
                default=Path('results'),
                show_default=True,
                help='Results directory'
            ),
            click.Option(
                ['--threads'],
                type=click.IntRange(min=1),
                default=None,
                help='Worker threads for minibatch gradients (default: preset, usually 1)'
            ),
        ])
        self.params.extend(_data_options())

    def format_help(self, ctx, formatter):
        super().format_help(ctx, formatter)
        formatter.write("\nArchitecture strings:\n")
        formatter.write(ARCH_GRAMMAR.split("\n", 2)[2])


def _exit_codes(func):
    """Turn library errors into their exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = func(*args, **kwargs)
        except GdlError as e:
            logger.error(f"{type(e).__name__}: {e}")
            ctx.exit(e.exit_code)
        ctx.exit(code or 0)
    return wrapper


@click.group(cls=_NaturalOrderGroup)
def cli():
    """
    Geometric deep learning toolkit: training, evaluation and diagnostics
    """
    pass


@cli.command(cls=GdlCommand, help='Train a model from a preset')
@click.option('--model', 'arch', type=str, default=None, help='Architecture string, e.g. mlp:784-500-10')
@click.option('--decoder', type=str, default=None, help='Decoder after a graph encoder, e.g. linear:2-4')
@click.option('--activation', type=str, default=None, help='relu, leaky_relu[:slope], elu, tanh or identity')
@click.option('--hidden', type=str, default=None, callback=_int_tuple, help='Hidden widths, e.g. 500 or 64,32')
@click.option('--heads', type=str, default=None, callback=_int_tuple, help='Attention heads per hidden GAT layer')
@click.option('--self-loops/--no-self-loops', 'self_loops', default=None, help='GAT nodes attend to themselves')
@click.option('--lr', type=float, default=None, help='Learning rate')
@click.option('--batch', type=int, default=None, help='Minibatch size')
@click.option('--epochs', type=int, default=None, help='Epochs')
@click.option('--lr-decay', 'lr_decay_factor', type=float, default=None, help='Learning rate decay factor')
@click.option('--lr-decay-every', type=int, default=None, help='Epochs between decays (0: never)')
@click.option('--weight-decay', type=float, default=None, help='L2 coefficient added to the gradient')
@click.option('--log-every', type=int, default=None, help='Epochs between metric rows')
@click.option('--checkpoint-every', type=int, default=None, help='Epochs between checkpoints (0: final only)')
@click.option('--fisher-every', type=int, default=None, help='Epochs between Fisher rank samples (0: off)')
@click.option('--val-fraction', type=float, default=None, help='Share of the training file held out (MNIST)')
@click.option('--train-nodes', type=str, default=None, callback=_int_tuple, help='Labelled nodes (Karate)')
@click.option('--normalize-features/--raw-features', 'normalize_features', default=None,
              help='Row-normalize node features (Cora)')
@_exit_codes
def train(
    arch, decoder, activation, hidden, heads, self_loops,
    lr, batch, epochs, lr_decay_factor, lr_decay_every, weight_decay,
    log_every, checkpoint_every, fisher_every, val_fraction, train_nodes, normalize_features,
    config_file, config_section, out, threads,
    dataset, data_dir, seed, raw_pixels, verbose,
):
    """
    Train a model; writes metrics.csv, model.gdl and model.gdl.json
    """
    overrides: Dict[str, Any] = {
        'dataset': {
            'data_dir': data_dir,
            'raw_pixels': raw_pixels,
            'val_fraction': val_fraction,
            'normalize_features': normalize_features,
            'train_nodes': list(train_nodes) if train_nodes is not None else None,
        },
        'model': {
            'arch': arch,
            'decoder': decoder,
            'activation': activation,
            'hidden': list(hidden) if hidden is not None else None,
            'heads': list(heads) if heads is not None else None,
            'self_loops': self_loops,
        },
        'optimizer': {
            'learning_rate': lr,
            'batch_size': batch,
            'epochs': epochs,
            'seed': seed,
            'lr_decay_factor': lr_decay_factor,
            'lr_decay_every': lr_decay_every,
            'weight_decay': weight_decay,
            'log_every': log_every,
            'checkpoint_every': checkpoint_every,
            'threads': threads,
            'fisher_every': fisher_every,
        },
    }
    cfg = gdl_run.resolve_config('train', config_file, config_section, dataset, overrides, out)
    result = gdl_run.train(cfg, verbose)
    for split in ('train', 'val', 'test'):
        if f'{split}_accuracy' in result.summary:
            click.echo(f"{split}_accuracy {result.summary[f'{split}_accuracy']:.4f}")
    return 0


@cli.command(name='eval', cls=GdlDataCommand, help='Accuracy of a checkpoint on one split')
@click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Checkpoint written by train (model.gdl)')
@click.option('--split', type=click.Choice(['train', 'val', 'test']), default='val', show_default=True,
              help='Split to evaluate')
@_exit_codes
def evaluate(checkpoint, split, dataset, data_dir, seed, raw_pixels, verbose):
    """
    Evaluate a checkpoint; weights are read only
    """
    loss, accuracy = gdl_run.evaluate(checkpoint, split, dataset, data_dir, seed, raw_pixels, verbose)
    click.echo(f"{split}_loss {loss:.4f}")
    click.echo(f"{split}_accuracy {accuracy:.4f}")
    return 0


@cli.command(name='graph-info', help='Graph statistics and Laplacian checks')
@click.argument('edge_list', type=click.Path(exists=True, dir_okay=False), required=False)
@click.option('--dataset', type=click.Choice(['karate', 'cora']), default=None,
              help='Inspect a graph dataset instead of an edge list')
@click.option('--data_dir', type=click.Path(file_okay=False), default=None, help='Dataset directory (cora)')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed of the random orientations')
@click.option('--export', type=click.Path(dir_okay=False), default=None, help='Also write the graph as an edge list')
@click.option('-v', '--verbose', is_flag=True, default=False, show_default=True, help='Enable verbose output')
@_exit_codes
def graph_info(edge_list, dataset, data_dir, seed, export, verbose):
    """
    Print |V|, |E|, degree histogram, components and spectrum of L;
    check L == X^T X under two random orientations
    """
    info = gdl_run.graph_info(edge_list, dataset, seed, export, verbose, data_dir)
    ok = info.factorization_ok and info.heat_ok is not False
    click.echo("PASS" if ok else "FAIL")
    return 0 if ok else CHECK_FAILED_EXIT


@cli.command(cls=GdlDataCommand, help='Fisher information diagnostics at one sample')
@click.option('--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Checkpoint written by train (model.gdl)')
@click.option('--sample', 'sample_index', type=int, default=0, show_default=True,
              help='Sample index (node id for graph datasets)')
@click.option('--out', type=click.Path(file_okay=False), default=Path('results'), show_default=True,
              help='Results directory')
@_exit_codes
def fisher(checkpoint, sample_index, out, dataset, data_dir, seed, raw_pixels, verbose):
    """
    Write fisher.csv; print the numerical rank and identity residuals
    """
    report, ok = gdl_run.fisher(checkpoint, sample_index, out, dataset, data_dir, seed, raw_pixels, verbose)
    click.echo(f"rank {report.numerical_rank}")
    for name, value in sorted(report.residuals.items()):
        click.echo(f"{name} {'skipped' if value is None else f'{value:.3e}'}")
    return 0 if ok else CHECK_FAILED_EXIT


@cli.command(name='list-presets', help='List experiment presets')
@click.option('--config_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Preset file (default: the bundled experiments.yml)')
@_exit_codes
def list_presets(config_file):
    """
    List preset sections with their type and architecture
    """
    config_file = config_file or default_config_file()
    click.echo(f"Presets in {config_file}:")
    for section in list_sections(config_file):
        preset = ConfigYAML.from_section(config_file, section)
        click.echo(f"  {section:<16} {preset.EXPTYPE.name:<11} "
                   f"{preset.dataset_params.name:<8} {preset.model_params.arch}")
    return 0


def main():
    """Entry point; usage errors exit with the configuration error code"""
    try:
        code = cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    sys.exit(code or 0)


if __name__ == '__main__':
    main()
