"""Batch sentence-encoder export producing EMB1 embedding file pairs."""

__version__ = "0.1.0"

from .encode import ExportJob, ExportResult, encode_posts

__all__ = ["ExportJob", "ExportResult", "encode_posts", "__version__"]
