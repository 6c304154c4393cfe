"""srlkit: semantic role labelling over bracketed constituency trees.

The toolkit covers the whole pipeline: tree parsing, corpus ingestion,
candidate-constituent extraction, feature extraction, word clustering,
linear classification, end-to-end labelling and evaluation.
"""

__version__ = "0.1.0"

from srlkit.errors import SrlkitError

__all__ = ["SrlkitError", "__version__"]
