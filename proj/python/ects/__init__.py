"""Early classification of time series.

Thin Python layer over the C++ library: cost functions, the hindsight oracle,
paired statistics, the synthetic generator and the fit/evaluate/benchmark pipeline.
Settings are passed as ``{key: value}`` strings using the same keys as the ``ects``
command-line tool (see ``config_keys()``).
"""

from ._ects import (
    ConfigError,
    EctsError,
    ParseError,
    average_ranks,
    benchmark,
    config_keys,
    default_checkpoints,
    delay_cost,
    fit_and_evaluate,
    holm_correction,
    load_tsv,
    make_synthetic,
    mean_ranks,
    misclassification_cost,
    oracle_avg_cost,
    pareto_front,
    resolve_config,
    wilcoxon_signed_rank,
    win_rate,
    write_synthetic,
)

__all__ = [
    "ConfigError",
    "EctsError",
    "ParseError",
    "average_ranks",
    "benchmark",
    "config_keys",
    "default_checkpoints",
    "delay_cost",
    "fit_and_evaluate",
    "holm_correction",
    "load_tsv",
    "make_synthetic",
    "mean_ranks",
    "misclassification_cost",
    "oracle_avg_cost",
    "pareto_front",
    "resolve_config",
    "settings",
    "wilcoxon_signed_rank",
    "win_rate",
    "write_synthetic",
]

__version__ = "0.1.0"


def settings(**values):
    """Builds a settings dict, turning numbers, bools and lists into config strings."""
    out = {}
    for key, value in values.items():
        if isinstance(value, bool):
            out[key] = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            out[key] = ",".join(str(v) for v in value)
        else:
            out[key] = str(value)
    return out
