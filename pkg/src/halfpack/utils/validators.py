"""Validation utilities for experiment settings."""

import math
from dataclasses import dataclass, field
from typing import List

from halfpack.core.config import ExperimentConfig
from halfpack.core.engine import InitKind


@dataclass
class ValidationResult:
    """Result of a validation check."""
    valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.valid and len(self.errors) == 0


def validate_experiment_config(config: ExperimentConfig) -> ValidationResult:
    """
    Check an experiment configuration before any simulation starts.

    Errors make the run meaningless; warnings flag settings that give weak
    or partially undefined estimates.
    """
    errors = []
    warnings = []

    if not config.r_values:
        errors.append("R_VALUES is empty")
    bad_r = [r for r in config.r_values if not (r > 0 and math.isfinite(r))]
    if bad_r:
        errors.append(f"r values must be positive and finite: {bad_r}")

    if not 0 < config.p1 < 1:
        errors.append(f"P1 must lie strictly between 0 and 1, got {config.p1}")
    if config.warmup < 0:
        errors.append(f"WARMUP must be non-negative, got {config.warmup}")
    if not config.horizon > config.warmup:
        errors.append(f"HORIZON ({config.horizon}) must exceed WARMUP ({config.warmup})")
    if config.replications < 1:
        errors.append(f"REPLICATIONS must be at least 1, got {config.replications}")
    if config.batches < 1:
        errors.append(f"BATCHES must be at least 1, got {config.batches}")
    elif config.batches < 10:
        warnings.append(f"Only {config.batches} batches; confidence intervals will be wide")
    if config.workers < 1:
        errors.append(f"WORKERS must be at least 1, got {config.workers}")
    if config.cells_per_row < 1:
        errors.append(f"CELLS_PER_ROW must be at least 1, got {config.cells_per_row}")

    y, delta = config.window_y, config.window_delta
    if not y > 0:
        errors.append(f"Y must be positive, got {y}")
    if delta < 0:
        errors.append(f"DELTA must be non-negative, got {delta}")
    elif 0 < config.p1 < 1 and not delta < y - config.p1:
        errors.append(f"DELTA ({delta:g}) must be below Y - P1 ({y - config.p1:g})")
    if 0 < config.p1 < 1 and config.z_limit() is None:
        warnings.append(f"Y={y:g} is outside (P1, P1 + 2 P2); no limit reported for F2(y r)/r")

    bad_caps = [i for i in config.i_list if not (math.isinf(i) or i >= 1)]
    if bad_caps:
        errors.append(f"I_LIST entries must be integers >= 1 or inf: {bad_caps}")

    if config.init is InitKind.SNAPSHOT:
        if config.snapshot is None:
            errors.append("INIT=snapshot needs SNAPSHOT=<path>")
        elif not config.snapshot.is_file():
            errors.append(f"Snapshot file not found: {config.snapshot}")

    if config.master_seed is None:
        warnings.append("No MASTER_SEED set; results are not reproducible")

    return ValidationResult(valid=len(errors) == 0, errors=errors, warnings=warnings)
