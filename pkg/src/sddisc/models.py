"""Bundled example models: the elliptic target filter and the 1/(s+1)^3 signal model."""

from importlib import resources

from .lti import StateSpaceModel, model_from_dict

__all__ = ["example_path", "elliptic_target", "lowpass_signal_model"]


def example_path(name: str):
    """Filesystem path of a bundled model, e.g. ``"G_elliptic.json"``."""
    return resources.files("sddisc") / "data" / name


def _load(name) -> StateSpaceModel:
    import json
    return model_from_dict(json.loads(example_path(name).read_text()))


def elliptic_target() -> StateSpaceModel:
    return _load("G_elliptic.json")


def lowpass_signal_model() -> StateSpaceModel:
    return _load("F_lowpass3.json")
