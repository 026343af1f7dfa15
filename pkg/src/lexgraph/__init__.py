"""Legal case-similarity toolkit: knowledge-graph construction from
annotated documents, LDA-driven feature selection, relational-GCN link
prediction with a DistMult decoder, and feature-level explanations."""

__version__ = "0.1.0"
