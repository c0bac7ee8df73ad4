"""Graph representation, loading and graph-derived operators."""
