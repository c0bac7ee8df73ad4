"""Reverse-mode automatic differentiation over dense matrices."""
