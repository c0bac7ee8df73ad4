"""Runtime settings for the SDGE experiment harness."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import field_validator
from pydantic_settings import (
    BaseSettings,
    SettingsConfigDict,
)

BASE_DIR = Path(__file__).resolve().parent
OUTPUT_DIR = BASE_DIR / "outputs"
DATA_CACHE_DIR = BASE_DIR / "data"
TEMPLATE_DIR = BASE_DIR / "templates"

SUMMARY_TEMPLATE_NAME = "summary.md.j2"
SUMMARY_FILE_NAME = "summary.md"
METRICS_FILE_NAME = "metrics.json"
HISTORY_FILE_NAME = "history.csv"
EMBEDDING_FILE_NAME = "embedding.csv"
PARTITION_FILE_NAME = "partition.txt"
TIMING_FILE_NAME = "timing.json"
AGGREGATE_FILE_NAME = "aggregate.csv"
CHECKPOINT_FILE_NAME = "checkpoint.json"

ENV_PREFIX = "SDGE_"
REQUEST_TIMEOUT_SECONDS = 300
DEFAULT_LOG_LEVEL = "INFO"

# Architecture defaults.
GCN_LAYER_WIDTHS = (200, 170, 140, 100)
MLP_HIDDEN_WIDTH = 128
DEFAULT_EMBEDDING_DIMS = 64
DEFAULT_ORDER = 4
DYRELU_PIECES = 2
DYRELU_REDUCTION = 8
DYRELU_SLOPE_RANGE = 1.0
DYRELU_INTERCEPT_RANGE = 0.5
BATCH_NORM_EPS = 1e-9

# Training defaults.
DEFAULT_EPOCHS = 100
DEFAULT_TAU = 10.0
DEFAULT_BETA = 1.0
DEFAULT_GAMMA = 1.0
DEFAULT_NEGATIVES = 5
DEFAULT_NOISE_SIGMA = 0.1
DEFAULT_TOLERANCE = 1e-4
CONVERGENCE_WINDOW = 5
FUSION_REWEIGHT_INTERVAL = 5
DEGREE_NEGATIVE_EXPONENT = 0.75
ADAM_LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Spectral propagation defaults.
DEFAULT_MU = 0.2
DEFAULT_THETA = 0.5
DEFAULT_CHEB_ORDER = 10

# Graph construction defaults.
DEFAULT_KNN_K = 10
FILL_IN_BUDGET_FACTOR = 50
DENSE_FALLBACK_MAX_NODES = 5000

# Clustering defaults.
KMEANS_MAX_ITERATIONS = 300
KMEANS_TOLERANCE = 1e-4
KMEANS_RESTARTS = 10

# Default synthetic benchmark: 4 planted blocks of 50 nodes.
DEFAULT_SBM_BLOCKS = 4
DEFAULT_SBM_BLOCK_SIZE = 50
DEFAULT_SBM_P_IN = 0.3
DEFAULT_SBM_P_OUT = 0.02
DEFAULT_TABULAR_SAMPLES = 600
DEFAULT_TABULAR_FEATURES = 10


class Settings(BaseSettings):
    """Environment-backed defaults for every CLI flag."""

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX)

    order: int = DEFAULT_ORDER
    dims: int = DEFAULT_EMBEDDING_DIMS
    epochs: int = DEFAULT_EPOCHS
    lr: float = ADAM_LEARNING_RATE
    tau: float = DEFAULT_TAU
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    agg: str = "cat"
    negatives: int = DEFAULT_NEGATIVES
    negative_dist: str = "uniform"
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    tolerance: float = DEFAULT_TOLERANCE
    spectral: str = "post"
    cheb_order: int = DEFAULT_CHEB_ORDER
    mu: float = DEFAULT_MU
    theta: float = DEFAULT_THETA
    seed: str = "1"
    k: int | None = None
    knn_k: int = DEFAULT_KNN_K
    self_loop_isolated: bool = False
    deterministic: bool = False
    binarize_powers: bool = False
    dense_fallback: bool = False
    end_to_end: bool = False
    relu: bool = False
    no_spectral: bool = False
    gcn_ae: bool = False
    workers: int = 1
    output_dir: Path = OUTPUT_DIR
    cache_dir: Path = DATA_CACHE_DIR
    dataset: str = "sbm"
    edges: str | None = None
    attributes: str | None = None
    labels: str | None = None
    attributes_header: bool = False
    blocks: int = DEFAULT_SBM_BLOCKS
    block_size: int = DEFAULT_SBM_BLOCK_SIZE
    p_in: float = DEFAULT_SBM_P_IN
    p_out: float = DEFAULT_SBM_P_OUT
    samples: int = DEFAULT_TABULAR_SAMPLES
    features: int = DEFAULT_TABULAR_FEATURES
    save_checkpoint: bool = False
    log_level: str = DEFAULT_LOG_LEVEL

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value: object) -> str:
        """Normalize the configured log level to an uppercase string."""
        if value is None:
            return DEFAULT_LOG_LEVEL
        if isinstance(value, str):
            normalized = value.strip().upper()
            return normalized or DEFAULT_LOG_LEVEL
        raise TypeError(f"Configuration error: env_var={cls.env_name('log_level')} reason=invalid_type")

    @field_validator("agg", "spectral", "negative_dist", "dataset", mode="before")
    @classmethod
    def normalize_choice(cls, value: object) -> object:
        """Lowercase enumerated choices so `SDGE_AGG=SUM` behaves like `--agg sum`."""
        return value.strip().lower() if isinstance(value, str) else value

    @classmethod
    def env_name(cls, field_name: str) -> str:
        """Return the environment variable name for a settings field."""
        if field_name in cls.model_fields:
            return f"{ENV_PREFIX}{field_name.upper()}"
        raise ValueError(f"Settings field error: field={field_name} reason=missing_field")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached runtime settings instance."""
    return Settings()
