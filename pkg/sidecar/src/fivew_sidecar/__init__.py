"""HTTP sidecar serving the five model roles consumed by the fivew
pipeline: paraphrase generation, entailment, role labeling, question
generation, and question answering."""

from .bindings import BindingError, ModelBinding, default_bindings, load_bindings
from .postprocess import PostprocessError, paraphrase_postprocess
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "BindingError",
    "ModelBinding",
    "PostprocessError",
    "create_app",
    "default_bindings",
    "load_bindings",
    "paraphrase_postprocess",
    "__version__",
]
