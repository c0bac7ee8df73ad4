"""Community assignment and partition quality metrics."""
