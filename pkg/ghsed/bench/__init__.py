from .harness import (
    EXPERIMENTS,
    default_specs,
    gen_corpus,
    make_vocabulary,
    run_baseline_experiment,
    run_collision_experiment,
    run_embed_experiment,
    run_search_experiment,
    scan_oracle,
)

__all__ = [
    "EXPERIMENTS",
    "default_specs",
    "gen_corpus",
    "make_vocabulary",
    "run_baseline_experiment",
    "run_collision_experiment",
    "run_embed_experiment",
    "run_search_experiment",
    "scan_oracle",
]
