"""Minimal-pair articulatory target evaluation toolkit."""

from ._core import (
    DataError,
    Error,
    InvariantError,
    ParseError,
    __version__,
    build_graph,
    butterworth_lowpass,
    consistency_grad,
    consistency_losses,
    dtw,
    enumerate_cliques,
    extract_target,
    extract_targets,
    filtfilt,
    loo_accuracy,
    minimal_pair_sets,
    parse_mfa_dict,
    random_projection,
    read_trajectory,
    voicing_score,
    write_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
