"""Self-supervised losses, augmentation, negative sampling and the training loop."""
