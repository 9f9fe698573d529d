# backend/models.py
import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from detectors import DetectorKind


class Mode(str, Enum):
    SEMI = "semi"
    MC = "mc"
    BOUNDS = "bounds"


def _dedupe(values: list) -> list:
    return list(dict.fromkeys(values))


class ExperimentConfig(BaseModel):
    """One BER sweep: detector x N_R x Eb/N0 (x DF iteration)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    N: int = Field(256, ge=2)
    L_s: int = Field(64, ge=0, validate_default=True)
    N_T: int = Field(10, ge=1)
    N_R_list: List[int] = Field(default_factory=lambda: [30, 50, 100], min_length=1)
    ebn0_db_grid: List[float] = Field(default_factory=lambda: [float(x) for x in range(-12, 1)], min_length=1)
    detectors: List[DetectorKind] = Field(
        default_factory=lambda: [DetectorKind.MF, DetectorKind.MMSE, DetectorKind.IDF], min_length=1,
        validate_default=True,
    )
    df_iterations: int = Field(4, ge=1)
    realizations: int = Field(500, ge=1)
    blocks_per_realization: int = Field(1, ge=1)
    stop_at_errors: Optional[int] = Field(400, ge=1)
    seed: int = Field(20140101, ge=0, lt=2 ** 64)
    modes: List[Mode] = Field(default_factory=lambda: [Mode.SEMI, Mode.BOUNDS], min_length=1)
    output_path: str = "results/ber_curves.csv"
    normalize_pdp: bool = False
    sigma_s2: float = Field(1.0, gt=0)
    workers: int = Field(1, ge=1)
    mismatch_threshold: float = Field(3.0, gt=0)

    @field_validator("L_s")
    @classmethod
    def cyclic_prefix_shorter_than_block(cls, v: int, info: ValidationInfo) -> int:
        N = info.data.get("N")
        if N is not None and v >= N:
            raise ValueError(f"L_s must be smaller than N={N}, got {v}")
        return v

    @field_validator("N_R_list")
    @classmethod
    def positive_antenna_counts(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v):
            raise ValueError(f"every N_R must be >= 1, got {v}")
        return _dedupe(v)

    @field_validator("ebn0_db_grid")
    @classmethod
    def finite_grid(cls, v: List[float]) -> List[float]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError(f"Eb/N0 grid must be finite, got {v}")
        return v

    @field_validator("detectors")
    @classmethod
    def inverting_detectors_need_enough_antennas(cls, v: List[DetectorKind], info: ValidationInfo):
        v = _dedupe(v)
        N_T, N_R_list = info.data.get("N_T"), info.data.get("N_R_list")
        if N_T is None or not N_R_list:
            return v
        for kind in v:
            if kind in (DetectorKind.MMSE, DetectorKind.ZF) and N_T > min(N_R_list):
                raise ValueError(f"{kind.value} needs N_T <= min(N_R_list), got N_T={N_T}, N_R={min(N_R_list)}")
        return v

    @field_validator("modes")
    @classmethod
    def unique_modes(cls, v: List[Mode]) -> List[Mode]:
        return _dedupe(v)


CSV_COLUMNS = (
    "detector", "nt", "nr", "ebn0_db", "iteration", "ber_semi", "ber_mc",
    "mc_errors", "mc_bits", "mc_std_error", "realizations", "seed",
)


class CurveRecord(BaseModel):
    """
    One CSV row.

    `realizations` counts the channel draws averaged for ber_semi, or the
    realizations Monte Carlo used when only ber_mc is present. Closed-form
    bound rows carry 0.
    """

    model_config = ConfigDict(frozen=True)

    detector: str
    nt: int
    nr: int
    ebn0_db: float
    iteration: int = 1
    ber_semi: Optional[float] = None
    ber_mc: Optional[float] = None
    mc_errors: Optional[int] = None
    mc_bits: Optional[int] = None
    mc_std_error: Optional[float] = None
    realizations: int = 0
    seed: int

    @model_validator(mode="after")
    def has_a_ber(self) -> "CurveRecord":
        if self.ber_semi is None and self.ber_mc is None:
            raise ValueError("a curve record needs ber_semi or ber_mc")
        return self

    def to_row(self) -> list:
        row = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if value is None:
                row.append("")
            elif isinstance(value, float):
                row.append("%.9g" % value)
            else:
                row.append(str(value))
        return row
