import logging
from typing import Any, Iterable, Mapping, Optional, Sequence

from tabulate import tabulate

from gdlkit.schemas.hyper_params import RunConfig


# aesthetic
def str_pad_align(txt: str, pad='=', text_print_width=80) -> str:
    return txt.center(text_print_width, pad)

def pad_print(pad='=') -> str:
    return str_pad_align('', pad)

def str_print(txt: str, pad='=') -> str:
    return str_pad_align(f" {txt} ", pad)


def print_params(title: str, params: Mapping[str, Any], skip: Iterable[str] = ()) -> None:
    logging.info(pad_print())
    logging.info(f'[{title}]')
    for k, v in params.items():
        if k not in skip:
            logging.info(f'\t{k:<30}\t\t :: {v!s:>12}')


# run function header
def print_run_header(cfg: RunConfig, extra: Optional[Mapping[str, Any]] = None) -> None:
    """Print log header: config source, dataset, model and optimizer records"""
    logging.info(pad_print())
    logging.info(str_print(f"gdlkit {cfg.command}"))
    logging.info(pad_print())

    logging.info(f'[Config]   ::\tfile :: section')
    logging.info(f' preset    ::\t{cfg.config_file!s:<30}\t\t :: {cfg.config_section!s:>12} ')
    logging.info(f' output    ::\t{cfg.out_dir!s:<30}')

    print_params('Dataset', cfg.dataset._asdict())
    print_params('Model', cfg.model._asdict())
    print_params('Optimizer', cfg.optimizer._asdict())
    if extra:
        print_params('Run', extra)

    # terminate
    logging.info(pad_print())


def print_table(rows: Sequence[Sequence[Any]], headers: Sequence[str], title: str = "") -> None:
    """Log a plain-text table, one log record per line"""
    if title:
        logging.info(str_print(title, pad='-'))
    for line in tabulate(rows, headers=headers, floatfmt=".6g").splitlines():
        logging.info(line)
