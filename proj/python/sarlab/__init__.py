"""SAR chip laboratory: clutter-reduction modules and domain-invariant training.

The heavy lifting lives in the compiled extension; this package re-exports
the public surface.
"""

from sarlab._core import (
    ArgumentError,
    ConfigurationError,
    ContractError,
    IoError,
    Model,
    SarChip,
    augment_chip,
    build_scr_sweep,
    build_source_domains,
    corpus_clutter_mean,
    grl_schedule,
    image_scr,
    load_checkpoint,
    load_corpus,
    make_dataset,
    make_test_set,
    render_chip,
    save_corpus,
    segment,
    shift_scr,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "ContractError",
    "IoError",
    "Model",
    "SarChip",
    "augment_chip",
    "build_scr_sweep",
    "build_source_domains",
    "corpus_clutter_mean",
    "grl_schedule",
    "image_scr",
    "load_checkpoint",
    "load_corpus",
    "make_dataset",
    "make_test_set",
    "render_chip",
    "save_corpus",
    "segment",
    "shift_scr",
    "train",
]
