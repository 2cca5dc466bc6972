"""Python access to the poca multi-reward policy optimization library."""

from ._poca import (
    bi_nd_set,
    count_conflicts,
    diversity,
    ecdf_ranks,
    edit_distance,
    hypervolume_2d,
    load_config_json,
    nd_set,
    ned,
    standardize,
    train,
)

__all__ = [
    "bi_nd_set",
    "count_conflicts",
    "diversity",
    "ecdf_ranks",
    "edit_distance",
    "hypervolume_2d",
    "load_config_json",
    "nd_set",
    "ned",
    "standardize",
    "train",
]
