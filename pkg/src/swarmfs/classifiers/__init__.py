"""From-scratch binary classifiers behind one fit/predict/score contract."""
from swarmfs.classifiers import bayes, discriminant, linear, neighbors, neural, trees  # noqa: F401  (registration)
from swarmfs.classifiers.base import REGISTRY, FittedModel, ModelSpec, fit, predict, predict_score

FAMILIES = tuple(sorted(REGISTRY))
# families whose decision function is a single hyperplane fitted by a linear-model loss
LINEAR_FAMILIES = tuple(sorted(name for name, cls in REGISTRY.items() if cls.__module__ == linear.__name__))

__all__ = ["FAMILIES", "LINEAR_FAMILIES", "REGISTRY", "FittedModel", "ModelSpec", "fit", "predict", "predict_score"]
