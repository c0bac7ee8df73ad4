"""SDGE network: multi-order GCN stacks, fusion and the MLP head."""
