"""Dataset providers."""
