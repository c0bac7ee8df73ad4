"""Spectral propagation of embeddings through a modulated Laplacian."""
