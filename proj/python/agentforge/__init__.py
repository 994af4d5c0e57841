"""Python interface to the GUI-agent data-synthesis pipeline."""

import json as _json

from ._core import (
    Config,
    Pipeline as _Pipeline,
    cosine,
    embed_texts,
    generate_app_json,
    hash_similarity,
    load_config,
    parse_config,
    render_screen_pgm,
    sample_tasks_json,
)

__all__ = [
    "Config",
    "Pipeline",
    "cosine",
    "embed_texts",
    "generate_app",
    "hash_similarity",
    "load_config",
    "parse_config",
    "render_screen_pgm",
    "sample_tasks",
]


def generate_app(name, n_screens=8, elements_per_screen=5, n_fields=3, seed=1):
    """Generate a simulated app spec as a dict."""
    return _json.loads(generate_app_json(name, n_screens, elements_per_screen, n_fields, seed))


def sample_tasks(spec, count, seed=1):
    """Sample benchmark tasks for a spec dict; returns a list of dicts."""
    return _json.loads(sample_tasks_json(_json.dumps(spec), count, seed))


class Pipeline:
    """Stage runner; each method returns the stage outcome as a dict."""

    def __init__(self, config, force=False, jobs=1, seed=None):
        self._inner = _Pipeline(config, force=force, jobs=jobs, seed=seed)

    def explore(self):
        return _json.loads(self._inner.explore())

    def build_memory(self):
        return _json.loads(self._inner.build_memory())

    def synthesize(self):
        return _json.loads(self._inner.synthesize())

    def rollout(self):
        return _json.loads(self._inner.rollout())

    def analyze_overlap(self):
        return _json.loads(self._inner.analyze_overlap())

    def analyze_coverage(self):
        return _json.loads(self._inner.analyze_coverage())

    def export_training(self):
        return _json.loads(self._inner.export_training())

    @property
    def warnings(self):
        return list(self._inner.warnings)
